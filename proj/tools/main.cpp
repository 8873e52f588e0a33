#include <cstdio>

int main() {
    std::puts("regolith: placeholder");
    return 0;
}
