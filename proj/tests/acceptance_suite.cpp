// Standalone acceptance binary: runs every criterion at its pinned
// tolerance, prints one pass/fail line per criterion, exits nonzero on any
// failure. Registered with ctest; also reachable as `cproj-lab suite`.

#include <iostream>

#include "cprojlab/acceptance.hpp"

int main() {
  auto rep = cprojlab::run_acceptance(&std::cout);
  return rep.all_pass ? 0 : 1;
}
