#include <cstdio>

int main() {
  std::puts("anmf: placeholder");
  return 0;
}
