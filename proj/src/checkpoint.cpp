#include "navlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "navlab/errors.hpp"

namespace navlab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'N', 'A', 'V', 'L', 'A', 'B', 'C', 'K'};

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s.data(), s.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  void take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ConfigError("checkpoint: truncated archive");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    take(&v, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (pos_ + n > bytes_.size()) throw ConfigError("checkpoint: truncated string");
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorArchive::add(std::string name, nn::Matrix value) {
  entries.push_back({std::move(name), std::move(value)});
}

bool TensorArchive::has(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return true;
  }
  return false;
}

const nn::Matrix& TensorArchive::get(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e.value;
  }
  throw ConfigError("checkpoint: missing tensor '" + std::string(name) + "'");
}

std::string encode_archive(const TensorArchive& archive) {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, TensorArchive::kVersion);
  put_str(out, archive.arch);
  put_u32(out, static_cast<std::uint32_t>(archive.entries.size()));
  for (const auto& e : archive.entries) {
    put_str(out, e.name);
    put_u32(out, static_cast<std::uint32_t>(e.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(e.value.cols()));
    out.append(reinterpret_cast<const char*>(e.value.data()),
               static_cast<std::size_t>(e.value.size()) * sizeof(double));
  }
  return out;
}

TensorArchive decode_archive(std::string_view bytes) {
  Reader in(bytes);
  char magic[8];
  in.take(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw ConfigError("checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != TensorArchive::kVersion) {
    throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  }
  TensorArchive archive;
  archive.arch = in.str();
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.str();
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    nn::Matrix m(rows, cols);
    in.take(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    archive.add(std::move(name), std::move(m));
  }
  if (!in.at_end()) throw ConfigError("checkpoint: trailing bytes");
  return archive;
}

void save_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  const std::string bytes = encode_archive(archive);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("checkpoint: cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TensorArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_archive(buf.str());
}

void store_tensors(TensorArchive& archive, const std::vector<nn::ConstTensorRef>& tensors) {
  for (const auto& t : tensors) archive.add(t.name, t.map());
}

void restore_tensors(const TensorArchive& archive, const std::vector<nn::TensorRef>& tensors) {
  for (const auto& t : tensors) {
    const nn::Matrix& m = archive.get(t.name);
    if (m.rows() != t.rows || m.cols() != t.cols) {
      std::ostringstream os;
      os << "checkpoint: shape mismatch for '" << t.name << "': archive " << m.rows() << "x"
         << m.cols() << ", model " << t.rows << "x" << t.cols;
      throw ConfigError(os.str());
    }
    t.map() = m;
  }
}

void store_adam(TensorArchive& archive, const std::string& prefix, const nn::AdamState& state) {
  nn::Matrix step(1, 1);
  step(0, 0) = static_cast<double>(state.step);
  archive.add(prefix + "step", step);
  for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
    archive.add(prefix + "m" + std::to_string(i), state.first_moment[i]);
    archive.add(prefix + "v" + std::to_string(i), state.second_moment[i]);
  }
}

void restore_adam(const TensorArchive& archive, const std::string& prefix, nn::AdamState& state) {
  state.step = static_cast<std::int64_t>(archive.get(prefix + "step")(0, 0));
  for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
    const auto& m = archive.get(prefix + "m" + std::to_string(i));
    const auto& v = archive.get(prefix + "v" + std::to_string(i));
    if (m.rows() != state.first_moment[i].rows() || m.cols() != state.first_moment[i].cols() ||
        v.rows() != m.rows() || v.cols() != m.cols()) {
      throw ConfigError("checkpoint: optimizer moment shape mismatch under " + prefix);
    }
    state.first_moment[i] = m;
    state.second_moment[i] = v;
  }
}

}  // namespace navlab
