// CLI integration tests are at the bottom of the build: they need the binary.
#include <doctest.h>
