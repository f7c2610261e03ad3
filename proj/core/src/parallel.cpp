#include "bbmflow/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bbmflow {

std::size_t thread_count() {
  if (const char* env = std::getenv("BBMFLOW_THREADS")) {
    try {
      const long requested = std::stol(env);
      if (requested > 0) return static_cast<std::size_t>(requested);
    } catch (const std::exception&) {
      // unparsable values fall back to auto
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace bbmflow
