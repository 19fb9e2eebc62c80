#include <cstdio>
int main(){ std::puts("bench: not implemented yet"); return 0; }
