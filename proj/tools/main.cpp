#include <cstdio>
int main() { std::puts("compactonlab: commands arrive with the full build"); return 0; }
