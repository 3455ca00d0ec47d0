#include <cstdio>

int main() {
    std::puts("belh: CLI under construction");
    return 2;
}
