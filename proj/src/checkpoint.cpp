#include "fsamp/checkpoint.hpp"

#include "fsamp/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace fsamp {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kCheckpoint, "checkpoint: truncated file");
    }
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const DriftModel& model,
                     const SamplingContext& ctx) {
  Writer w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(model.layer_dims().size()));
  for (int d : model.layer_dims()) w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(model.activation()));
  w.u32(static_cast<std::uint32_t>(model.time_features()));
  w.u32(static_cast<std::uint32_t>(ctx.manifold_kind));
  w.f64(ctx.kappa);
  w.f64(ctx.gamma);
  w.u32(static_cast<std::uint32_t>(ctx.com_particles));
  w.u32(static_cast<std::uint32_t>(ctx.com_spatial));
  w.u64(model.num_params());
  for (Eigen::Index i = 0; i < model.params().size(); ++i) w.f64(model.params()[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + path);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read checkpoint: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));

  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw Error(ErrorCode::kCheckpoint, "checkpoint: bad magic in " + path);
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kCheckpoint,
                "checkpoint: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t n_dims = r.u32();
  if (n_dims < 2 || n_dims > 1024) throw Error(ErrorCode::kCheckpoint, "checkpoint: bad layer count");
  std::vector<int> dims(n_dims);
  for (auto& d : dims) d = static_cast<int>(r.u32());
  const std::uint32_t act = r.u32();
  if (act > 1) throw Error(ErrorCode::kCheckpoint, "checkpoint: unknown activation id");
  const int tf = static_cast<int>(r.u32());

  Checkpoint ck;
  const std::uint32_t kind = r.u32();
  if (kind > 2) throw Error(ErrorCode::kCheckpoint, "checkpoint: unknown manifold kind");
  ck.context.manifold_kind = static_cast<ManifoldKind>(kind);
  ck.context.kappa = r.f64();
  ck.context.gamma = r.f64();
  ck.context.com_particles = static_cast<int>(r.u32());
  ck.context.com_spatial = static_cast<int>(r.u32());

  try {
    ck.model = DriftModel(std::move(dims), static_cast<Activation>(act), tf);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCheckpoint, std::string("checkpoint: ") + e.what());
  }
  const std::uint64_t n_params = r.u64();
  if (n_params != ck.model.num_params()) {
    throw Error(ErrorCode::kCheckpoint, "checkpoint: parameter count does not match header");
  }
  for (Eigen::Index i = 0; i < ck.model.params().size(); ++i) ck.model.params()[i] = r.f64();
  if (!r.done()) throw Error(ErrorCode::kCheckpoint, "checkpoint: trailing bytes");
  return ck;
}

}  // namespace fsamp
