#include "ecl/expert/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ecl/nn/serialize.hpp"

namespace ecl::expert {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'C', 'P'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(&v),
             reinterpret_cast<const std::uint8_t*>(&v) + sizeof v);
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(&v),
             reinterpret_cast<const std::uint8_t*>(&v) + sizeof v);
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(&v),
             reinterpret_cast<const std::uint8_t*>(&v) + sizeof v);
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
  out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(&v),
             reinterpret_cast<const std::uint8_t*>(&v) + sizeof v);
}

struct Cursor {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > in.size()) throw std::runtime_error("state decode: truncated stream");
  }
  template <class T>
  T take() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_state(const PersonalizedState& state) {
  if (!state.experts.empty() && state.experts.size() != state.assignment.groups.size()) {
    throw std::invalid_argument("serialize_state: experts/groups misaligned");
  }
  std::vector<std::uint8_t> head;
  head.insert(head.end(), kMagic, kMagic + sizeof kMagic);
  put_u32(head, kStateVersion);
  put_u32(head, static_cast<std::uint32_t>(state.client_id));
  put_f64(head, state.lambda);
  head.push_back(state.scheme == ScalingScheme::ecl_scaling ? 0 : 1);
  head.push_back(state.norm_mode == NormMode::per_class_row ? 0 : 1);
  put_u16(head, 0);
  put_u32(head, static_cast<std::uint32_t>(state.retrained_global.spec.num_classes));
  put_u32(head, static_cast<std::uint32_t>(state.experts.size()));
  for (std::size_t m = 0; m < state.experts.size(); ++m) {
    const std::vector<int>& group = state.assignment.groups[m];
    put_u32(head, static_cast<std::uint32_t>(group.size()));
    for (int c : group) put_u32(head, static_cast<std::uint32_t>(c));
  }

  std::vector<std::vector<std::uint8_t>> sections;
  sections.push_back(nn::serialize(state.retrained_global));
  for (const nn::ModelParams& e : state.experts) sections.push_back(nn::serialize(e));

  const std::size_t table_at = head.size() + sizeof(std::uint32_t);
  std::size_t offset = table_at + sections.size() * 2 * sizeof(std::uint64_t);
  put_u32(head, static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    put_u64(head, offset);
    put_u64(head, s.size());
    offset += s.size();
  }
  for (const auto& s : sections) head.insert(head.end(), s.begin(), s.end());
  return head;
}

PersonalizedState deserialize_state(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  c.need(sizeof kMagic);
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("state decode: bad magic");
  }
  c.pos = sizeof kMagic;
  const std::uint32_t version = c.take<std::uint32_t>();
  if (version != kStateVersion) {
    throw std::runtime_error("state decode: unsupported version " + std::to_string(version));
  }
  PersonalizedState state;
  state.client_id = static_cast<int>(c.take<std::uint32_t>());
  state.lambda = c.take<double>();
  const std::uint8_t scheme = c.take<std::uint8_t>();
  const std::uint8_t norm = c.take<std::uint8_t>();
  if (scheme > 1 || norm > 1) throw std::runtime_error("state decode: bad enum value");
  state.scheme = scheme == 0 ? ScalingScheme::ecl_scaling : ScalingScheme::no_scaling;
  state.norm_mode = norm == 0 ? NormMode::per_class_row : NormMode::whole_matrix;
  c.take<std::uint16_t>();
  const std::uint32_t num_classes = c.take<std::uint32_t>();
  const std::uint32_t num_experts = c.take<std::uint32_t>();

  state.assignment.owners.assign(num_classes, -1);
  state.assignment.groups.resize(num_experts);
  for (std::uint32_t m = 0; m < num_experts; ++m) {
    const std::uint32_t size = c.take<std::uint32_t>();
    for (std::uint32_t j = 0; j < size; ++j) {
      const std::uint32_t cls = c.take<std::uint32_t>();
      if (cls >= num_classes) throw std::runtime_error("state decode: class id out of range");
      state.assignment.groups[m].push_back(static_cast<int>(cls));
      state.assignment.owners[cls] = static_cast<int>(m);
    }
  }
  // sorted_classes is the group concatenation by construction.
  for (const auto& g : state.assignment.groups) {
    state.assignment.sorted_classes.insert(state.assignment.sorted_classes.end(), g.begin(),
                                           g.end());
  }

  const std::uint32_t num_sections = c.take<std::uint32_t>();
  if (num_sections != num_experts + 1) {
    throw std::runtime_error("state decode: unexpected section count");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> table(num_sections);
  for (auto& [off, len] : table) {
    off = c.take<std::uint64_t>();
    len = c.take<std::uint64_t>();
    if (off + len > bytes.size() || off < c.pos) {
      throw std::runtime_error("state decode: section out of bounds");
    }
  }
  state.retrained_global =
      nn::deserialize(bytes.subspan(table[0].first, table[0].second));
  if (state.retrained_global.spec.num_classes != num_classes) {
    throw std::runtime_error("state decode: class count mismatch");
  }
  for (std::uint32_t m = 0; m < num_experts; ++m) {
    state.experts.push_back(
        nn::deserialize(bytes.subspan(table[m + 1].first, table[m + 1].second)));
  }
  return state;
}

void save_state(const PersonalizedState& state, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_state(state);
  std::ofstream of(path, std::ios::binary | std::ios::trunc);
  if (!of) throw std::runtime_error("cannot open for writing: " + path.string());
  of.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!of) throw std::runtime_error("write failed: " + path.string());
}

PersonalizedState load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_state(bytes);
}

}  // namespace ecl::expert
