#include "lipread/temporal.hpp"

#include "lipread/errors.hpp"

namespace lipread {

std::vector<std::size_t> standard_frame_indices(std::size_t length, std::size_t target) {
  if (length == 0) throw InvalidArgument("cannot standardize an empty sequence");
  if (target == 0) throw InvalidArgument("standardization target must be positive");
  std::vector<std::size_t> indices(target);
  if (length >= target) {
    const std::size_t offset = (length - target) / 2;
    for (std::size_t i = 0; i < target; ++i) indices[i] = offset + i;
  } else {
    for (std::size_t i = 0; i < target; ++i) indices[i] = i < length ? i : length - 1;
  }
  return indices;
}

}  // namespace lipread
