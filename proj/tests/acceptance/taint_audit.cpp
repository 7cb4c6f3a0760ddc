// Fails the build if test-tagged data reaches anything other than the final learner's
// evaluation, or if the hygiene probes stop firing.

#include <cstdio>

#include "support/taint.hpp"

int main() {
  const int failures = taint::audit(true);
  std::printf("taint audit: %s\n", failures ? "FAIL" : "PASS");
  return failures ? 1 : 0;
}
