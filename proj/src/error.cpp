#include "conefield/error.hpp"

namespace conefield {

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
    : Error(what), offset_(offset), expected_(std::move(expected)) {}

}  // namespace conefield
