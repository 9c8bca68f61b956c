#pragma once

// On-disk dataset format: one `subject_<id>.json` header and one
// `subject_<id>.f32` payload per subject. The header is
//   {"fs": <Hz>, "channels": C, "samples": N,
//    "trials": [{"start_sample": s, "end_sample": e, "label": -1|1}, ...]}
// with half-open [s, e) intervals. The payload is C*N little-endian IEEE
// float32 values, channel-major (all N samples of channel 0, then channel 1...).

#include "rgc/sigproc.hpp"

#include <filesystem>
#include <vector>

namespace rgc {

/// Writes header and payload for `rec` into `dir` (created if needed).
void write_recording(const std::filesystem::path& dir, const Recording& rec);

/// Reads one subject given the path of its JSON header.
Recording load_recording(const std::filesystem::path& header);

/// Loads every `subject_*.json` in `dir`, sorted by subject id.
/// Throws FormatError on any header/payload inconsistency.
std::vector<Recording> load_dataset(const std::filesystem::path& dir);

}  // namespace rgc
