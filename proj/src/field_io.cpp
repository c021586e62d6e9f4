//==============================================================================
// field_io.cpp
//==============================================================================

#include "halfwave/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "halfwave/errors.hpp"

namespace hw {

namespace {
constexpr char kMagic[8] = {'H', 'W', 'F', 'I', 'E', 'L', 'D', '1'};
}

void write_field(const std::string& path, const Field& f, const json& meta) {
  json header;
  header["n_points"] = f.grid->n();
  header["length"] = f.grid->length();
  header["window_inner"] = f.grid->window_inner();
  header["window_outer"] = f.grid->window_outer();
  header["meta"] = meta;
  const std::string h = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  os.write(kMagic, 8);
  uint64_t hl = h.size();
  os.write(reinterpret_cast<const char*>(&hl), sizeof(hl));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (int j = 0; j < f.size(); ++j) {
    double re = f.v[j].real(), im = f.v[j].imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof(double));
    os.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

StoredField read_field(const std::string& path, const GridPtr& grid_hint) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorKind::Io, "bad field container: " + path);
  uint64_t hl = 0;
  is.read(reinterpret_cast<char*>(&hl), sizeof(hl));
  std::string h(hl, '\0');
  is.read(h.data(), static_cast<std::streamsize>(hl));
  json header = json::parse(h);
  const int n = header.at("n_points").get<int>();
  const double length = header.at("length").get<double>();
  GridPtr g;
  if (grid_hint && grid_hint->n() == n && grid_hint->length() == length)
    g = grid_hint;
  else
    g = Grid::make(n, length, header.value("window_inner", 0.30), header.value("window_outer", 0.45));
  Field f(g);
  for (int j = 0; j < n; ++j) {
    double re, im;
    is.read(reinterpret_cast<char*>(&re), sizeof(double));
    is.read(reinterpret_cast<char*>(&im), sizeof(double));
    f.v[j] = cplx(re, im);
  }
  if (!is) throw Error(ErrorKind::Io, "truncated field container: " + path);
  return {f, header.value("meta", json::object())};
}

void write_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  os << "x,Re,Im\n" << std::setprecision(17);
  for (int j = 0; j < f.size(); ++j)
    os << f.grid->nodes()[j] << ',' << f.v[j].real() << ',' << f.v[j].imag() << '\n';
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  os << std::setw(2) << j << '\n';
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open: " + path);
  return json::parse(is);
}

}  // namespace hw
