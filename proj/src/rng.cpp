#include "geokge/rng.hpp"

#include <sstream>

#include "geokge/text_io.hpp"

namespace geokge {

std::string Rng::digest() const {
  std::ostringstream os;
  os << engine_;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

}  // namespace geokge
