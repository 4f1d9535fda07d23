#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "pinch/scenario.hpp"

int main(int argc, char** argv) {
  pinch::set_warnings_enabled(false);
  doctest::Context ctx;
  ctx.applyCommandLine(argc, argv);
  return ctx.run();
}
