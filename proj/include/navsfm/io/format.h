#pragma once

#include <stdexcept>

namespace navsfm::io {

// Malformed or incompatible file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace navsfm::io
