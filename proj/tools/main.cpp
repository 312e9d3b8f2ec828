#include <cstdio>

int main() {
  std::fprintf(stderr, "horncat: command line not wired up yet\n");
  return 1;
}
