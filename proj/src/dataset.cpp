#include "rgc/dataset.hpp"

#include "rgc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rgc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kPrefix = "subject_";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

fs::path payload_for(const fs::path& header) {
  fs::path p = header;
  p.replace_extension(".f32");
  return p;
}

std::string subject_of(const fs::path& header) {
  const std::string stem = header.stem().string();
  return stem.substr(kPrefix.size());
}

}  // namespace

void write_recording(const fs::path& dir, const Recording& rec) {
  rec.validate();
  if (rec.subject_id.empty()) throw InvalidInput("recording needs a subject id to be written");
  fs::create_directories(dir);
  const fs::path header = dir / (std::string(kPrefix) + rec.subject_id + ".json");

  json trials = json::array();
  for (const auto& t : rec.trials) {
    trials.push_back({{"start_sample", t.start}, {"end_sample", t.end}, {"label", to_int(t.label)}});
  }
  const json h{{"fs", rec.fs},
               {"channels", rec.channels()},
               {"samples", rec.samples()},
               {"trials", trials}};
  {
    std::ofstream out(header);
    if (!out) throw Error("cannot write " + header.string());
    out << h.dump(2) << '\n';
  }

  std::vector<std::uint32_t> words;
  words.reserve(static_cast<std::size_t>(rec.data.size()));
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    for (Eigen::Index t = 0; t < rec.samples(); ++t) {
      const auto v = static_cast<float>(rec.data(c, t));
      words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(v)));
    }
  }
  std::ofstream out(payload_for(header), std::ios::binary);
  if (!out) throw Error("cannot write " + payload_for(header).string());
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
}

Recording load_recording(const fs::path& header) {
  json h;
  {
    std::ifstream in(header);
    if (!in) throw FormatError("cannot open " + header.string());
    try {
      h = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(header.string() + ": " + e.what());
    }
  }

  Recording rec;
  rec.subject_id = subject_of(header);
  std::size_t channels = 0;
  std::size_t samples = 0;
  try {
    rec.fs = h.at("fs").get<double>();
    channels = h.at("channels").get<std::size_t>();
    samples = h.at("samples").get<std::size_t>();
    for (const auto& t : h.at("trials")) {
      const int label = t.at("label").get<int>();
      if (label != 1 && label != -1) {
        throw FormatError(header.string() + ": trial label must be -1 or 1");
      }
      rec.trials.push_back(TrialInterval{t.at("start_sample").get<std::size_t>(),
                                         t.at("end_sample").get<std::size_t>(),
                                         static_cast<Label>(label)});
    }
  } catch (const json::exception& e) {
    throw FormatError(header.string() + ": " + e.what());
  }
  if (!(rec.fs > 0.0) || channels == 0 || samples == 0) {
    throw FormatError(header.string() + ": fs, channels and samples must be positive");
  }

  const fs::path payload = payload_for(header);
  std::error_code ec;
  const auto actual = fs::file_size(payload, ec);
  if (ec) throw FormatError("missing payload " + payload.string());
  const std::uintmax_t expected = channels * samples * sizeof(float);
  if (actual != expected) {
    std::ostringstream os;
    os << payload.string() << ": expected " << expected << " bytes (" << channels << " x "
       << samples << " float32), found " << actual;
    throw FormatError(os.str());
  }

  std::vector<std::uint32_t> words(channels * samples);
  std::ifstream in(payload, std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!in) throw FormatError("short read on " + payload.string());

  rec.data.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(samples));
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < rec.data.rows(); ++c) {
    for (Eigen::Index t = 0; t < rec.data.cols(); ++t) {
      rec.data(c, t) = std::bit_cast<float>(to_little_endian(words[k++]));
    }
  }

  std::sort(rec.trials.begin(), rec.trials.end(),
            [](const TrialInterval& a, const TrialInterval& b) { return a.start < b.start; });
  try {
    rec.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(header.string() + ": " + e.what());
  }
  return rec;
}

std::vector<Recording> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
  std::vector<fs::path> headers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && p.stem().string().starts_with(kPrefix)) headers.push_back(p);
  }
  if (headers.empty()) throw FormatError(dir.string() + " contains no subject_*.json headers");
  std::sort(headers.begin(), headers.end());
  std::vector<Recording> out;
  out.reserve(headers.size());
  for (const auto& h : headers) out.push_back(load_recording(h));
  return out;
}

}  // namespace rgc
