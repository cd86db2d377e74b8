#include "fnirs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fnirs {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'F', 'N', 'I', 'R', 'S', 'C', 'K', 'P'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelState& model) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.spec.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.spec.layer_widths.size()));
  for (auto width : model.spec.layer_widths) w.put<std::uint64_t>(width);
  w.put<double>(model.spec.dropout_rate);
  w.put<std::uint64_t>(model.spec.n_classes);
  w.put<std::uint64_t>(model.input.steps);
  w.put<std::uint64_t>(model.input.channels);
  const auto params = model.parameters();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.value->rank()));
    for (auto d : p.value->shape()) w.put<std::uint64_t>(d);
    w.bytes(reinterpret_cast<const char*>(p.value->data()), p.value->size() * sizeof(double));
  }
  return w.take();
}

ModelState deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw CheckpointError("not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  ModelSpec spec;
  const auto kind = r.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(ModelKind::bilstm)) throw CheckpointError("unknown model kind in checkpoint");
  spec.kind = static_cast<ModelKind>(kind);
  spec.layer_widths.resize(r.get<std::uint32_t>());
  for (auto& width : spec.layer_widths) width = r.get<std::uint64_t>();
  spec.dropout_rate = r.get<double>();
  spec.n_classes = r.get<std::uint64_t>();
  InputShape input;
  input.steps = r.get<std::uint64_t>();
  input.channels = r.get<std::uint64_t>();

  ModelState model;
  try {
    model = build_model(spec, input, 0);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("invalid model description in checkpoint: ") + e.what());
  }
  auto params = model.parameters();
  const auto n = r.get<std::uint32_t>();
  if (n != params.size()) throw CheckpointError("checkpoint parameter count does not match its model description");
  for (auto& p : params) {
    const std::string name = r.bytes(r.get<std::uint32_t>());
    if (name != p.name) throw CheckpointError("expected parameter '" + p.name + "', found '" + name + "'");
    Shape shape(r.get<std::uint32_t>());
    for (auto& d : shape) d = r.get<std::uint64_t>();
    if (shape != p.value->shape())
      throw CheckpointError("parameter '" + name + "' has shape " + to_string(shape) + ", model expects " +
                            to_string(p.value->shape()));
    const std::string raw = r.bytes(p.value->size() * sizeof(double));
    std::memcpy(p.value->data(), raw.data(), raw.size());
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint payload");
  return model;
}

void write_checkpoint(const std::filesystem::path& path, const ModelState& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

ModelState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("missing file: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace fnirs
