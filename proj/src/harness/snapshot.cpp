#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cnsr/harness.hpp"

namespace cnsr {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_field(std::ostream& os, const ScalarField& f) {
  for (std::size_t i = 0; i < f.size(); ++i) put(os, f[i]);
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  template <class T>
  T get(const char* section) {
    T v;
    if (!is_.read(reinterpret_cast<char*>(&v), sizeof(T)))
      throw std::runtime_error("snapshot " + path_ + ": truncated file, missing section '" + section + "'");
    return to_little(v);
  }

  void field(ScalarField& f, const char* section) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = get<double>(section);
  }

 private:
  std::istream& is_;
  std::string path_;
};

}  // namespace

void save_snapshot(const State& s, const SnapshotMeta& meta, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("snapshot: cannot write " + path.string());
  os.write("CNSR", 4);
  put<std::uint32_t>(os, snapshot_version);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid().n()));
  put<double>(os, s.grid().length());
  put<double>(os, s.t);
  put<double>(os, static_cast<double>(meta.mu));
  put<double>(os, meta.epsilon);
  put<double>(os, meta.tau);
  put_field(os, s.n);
  put_field(os, s.c);
  for (int a = 0; a < 3; ++a) put_field(os, s.u[a]);
  put_field(os, s.p.size() ? s.p : ScalarField(s.grid_ptr()));
  if (!os) throw std::runtime_error("snapshot: write failed for " + path.string());
}

LoadedSnapshot load_snapshot(const std::filesystem::path& path, const GridPtr& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path.string());
  Reader r(is, path.string());
  char magic[4] = {};
  if (!is.read(magic, 4)) throw std::runtime_error("snapshot " + path.string() + ": truncated file, missing section 'magic'");
  if (std::memcmp(magic, "CNSR", 4) != 0) throw std::runtime_error("snapshot " + path.string() + ": bad magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != snapshot_version)
    throw std::runtime_error("snapshot " + path.string() + ": unsupported version " + std::to_string(version));
  const auto n = r.get<std::uint32_t>("n_per_axis");
  const double L = r.get<double>("box_length");
  if (n < 2 || n > 4096 || !(L > 0.0))
    throw std::runtime_error("snapshot " + path.string() + ": invalid grid metadata");
  if (expected && (static_cast<int>(n) != expected->n() || L != expected->length()))
    throw std::runtime_error("snapshot " + path.string() + ": shape mismatch, file has n_per_axis = " +
                             std::to_string(n) + " and L = " + std::to_string(L) + ", expected n_per_axis = " +
                             std::to_string(expected->n()) + " and L = " + std::to_string(expected->length()));
  LoadedSnapshot out;
  out.state.t = r.get<double>("time");
  out.meta.mu = static_cast<int>(r.get<double>("mu"));
  out.meta.epsilon = r.get<double>("epsilon");
  out.meta.tau = r.get<double>("tau");
  const GridPtr g = expected ? expected : Grid::make(static_cast<int>(n), L);
  out.state = [&] {
    State s = State::zero(g);
    s.t = out.state.t;
    return s;
  }();
  r.field(out.state.n, "n");
  r.field(out.state.c, "c");
  r.field(out.state.u[0], "u_x");
  r.field(out.state.u[1], "u_y");
  r.field(out.state.u[2], "u_z");
  r.field(out.state.p, "p");
  if (is.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("snapshot " + path.string() + ": trailing data after section 'p'");
  return out;
}

}  // namespace cnsr
