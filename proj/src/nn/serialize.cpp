#include "ecl/nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ecl::nn {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'C', 'L'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

struct Writer {
  std::vector<std::uint8_t> out;

  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f32(float v) { bytes(&v, sizeof v); }
};

struct Reader {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;

  void bytes(void* p, std::size_t n) {
    if (pos + n > in.size()) throw std::runtime_error("checkpoint decode: truncated stream");
    std::memcpy(p, in.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  float f32() {
    float v;
    bytes(&v, sizeof v);
    return v;
  }
  bool done() const { return pos == in.size(); }
};

void write_layer(Writer& w, const LayerParams& layer) {
  for (double v : layer.w.a) w.f32(static_cast<float>(v));
  for (double v : layer.b) w.f32(static_cast<float>(v));
}

void read_layer(Reader& r, LayerParams& layer, std::size_t out, std::size_t in) {
  layer.w = Mat(out, in);
  for (double& v : layer.w.a) v = static_cast<double>(r.f32());
  layer.b.resize(out);
  for (double& v : layer.b) v = static_cast<double>(r.f32());
}

}  // namespace

std::vector<std::uint8_t> serialize(const ModelParams& model) {
  model.spec.validate();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(model.spec.input_dim));
  w.u32(static_cast<std::uint32_t>(model.spec.block_widths.size()));
  for (std::size_t width : model.spec.block_widths) w.u32(static_cast<std::uint32_t>(width));
  w.u32(static_cast<std::uint32_t>(model.spec.num_classes));
  w.u64(model.spec.init_seed);
  for (const LayerParams& block : model.blocks) write_layer(w, block);
  write_layer(w, model.classifier);
  return std::move(w.out);
}

ModelParams deserialize(std::span<const std::uint8_t> bytes) {
  Reader r{bytes};
  char magic[4];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("checkpoint decode: bad magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint decode: unsupported version " + std::to_string(version));
  }
  ModelParams m;
  m.spec.input_dim = r.u32();
  const std::uint32_t num_blocks = r.u32();
  m.spec.block_widths.resize(num_blocks);
  for (auto& width : m.spec.block_widths) width = r.u32();
  m.spec.num_classes = r.u32();
  m.spec.init_seed = r.u64();
  m.spec.validate();

  std::size_t in = m.spec.input_dim;
  m.blocks.resize(num_blocks);
  for (std::size_t l = 0; l < num_blocks; ++l) {
    read_layer(r, m.blocks[l], m.spec.block_widths[l], in);
    in = m.spec.block_widths[l];
  }
  read_layer(r, m.classifier, m.spec.num_classes, in);
  if (!r.done()) throw std::runtime_error("checkpoint decode: trailing bytes");
  m.freeze.assign(m.num_groups(), false);
  return m;
}

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize(model);
  std::ofstream of(path, std::ios::binary | std::ios::trunc);
  if (!of) throw std::runtime_error("cannot open for writing: " + path.string());
  of.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!of) throw std::runtime_error("write failed: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace ecl::nn
