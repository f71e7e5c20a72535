#include "hubforge/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hubforge {

int resolve_threads(int requested) {
  if (const char* env = std::getenv("HUBFORGE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) requested = static_cast<int>(v);
  }
  if (requested <= 0) {
#ifdef _OPENMP
    requested = omp_get_max_threads();
#else
    requested = 1;
#endif
  }
  return requested;
}

}  // namespace hubforge
