#include <cstdio>

int main() {
  std::puts("enot: command-line interface placeholder");
  return 1;
}
