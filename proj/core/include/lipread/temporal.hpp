#pragma once

#include <cstddef>
#include <vector>

namespace lipread {

/// Number of frames every clip is standardized to (one second at 20 fps).
inline constexpr std::size_t kStandardFrames = 20;

/// Source frame index for each of `target` output frames, given a clip of
/// `length` frames. Longer clips are center-cropped: floor((length - target) / 2)
/// leading frames are dropped. Shorter clips keep every frame and repeat the
/// last one. Shared by the landmark and frame standardizers so both select
/// identical frames.
std::vector<std::size_t> standard_frame_indices(std::size_t length,
                                                std::size_t target = kStandardFrames);

}  // namespace lipread
