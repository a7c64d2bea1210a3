#include "ucahar/types.hpp"

namespace ucahar {

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace ucahar
