#pragma once

#include <stdexcept>
#include <string>

namespace dradar {

// Invalid or inconsistent run configuration (bad key, bad value, broken
// structural requirement such as a non-power-of-two LO tree).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dradar
