#pragma once

#include <stdexcept>
#include <string>

namespace cicam {

// Bad user input: configs, flags, dimension mismatches detected at the API edge.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thresholded localization map contains no positive response.
struct NoForegroundError : std::runtime_error {
  NoForegroundError() : std::runtime_error("empty foreground mask") {}
};

}  // namespace cicam
