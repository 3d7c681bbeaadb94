#include "gil/parallel.hpp"

#include <cstdlib>
#include <string>

namespace gil {

unsigned default_workers() {
  if (const char *env = std::getenv("GIL_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0)
        return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
  }
  return 1;
}

} // namespace gil
