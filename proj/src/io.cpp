#include "gph/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gph/errors.hpp"

namespace gph {

namespace {

void put_i32(std::ostream& out, std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::int32_t get_i32(std::istream& in) {
  std::int32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ConfigError("truncated record header");
  return v;
}

void put_cplx(std::ostream& out, const cplx* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(cplx)));
}

void get_cplx(std::istream& in, cplx* data, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(data), std::streamsize(n * sizeof(cplx))))
    throw ConfigError("truncated record body");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(data[i].real()) || !std::isfinite(data[i].imag()))
      throw NumericError("non-finite coefficient in record");
}

void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw ConfigError(std::string("not a ") + magic + " record");
}

void expect_ordering(int v) {
  if (v != ModeLattice::kOrderingVersion)
    throw ConfigError("unsupported lattice ordering version " + std::to_string(v));
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  return f;
}

}  // namespace

void write_field(std::ostream& out, const TorusField& f) {
  out.write("GPHF", 4);
  put_i32(out, f.lattice().cutoff());
  put_i32(out, ModeLattice::kOrderingVersion);
  put_cplx(out, f.data().data(), f.size());
}

TorusField read_field(std::istream& in) {
  expect_magic(in, "GPHF");
  const ModeLattice lat(get_i32(in));
  expect_ordering(get_i32(in));
  std::vector<cplx> c(lat.size());
  get_cplx(in, c.data(), c.size());
  return TorusField(lat, std::move(c));
}

void write_field_csv(std::ostream& out, const TorusField& f) {
  const ModeLattice& lat = f.lattice();
  out << "# M=" << lat.cutoff() << " ordering=" << ModeLattice::kOrderingVersion << "\n";
  out << "n1,n2,n3,re,im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode n = lat.mode(i);
    out << n[0] << ',' << n[1] << ',' << n[2] << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

TorusField read_field_csv(std::istream& in) {
  std::string line;
  int m = 0, ord = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "# M=%d ordering=%d", &m, &ord) != 2)
    throw ConfigError("field CSV lacks the header line");
  expect_ordering(ord);
  const ModeLattice lat(m);
  TorusField f(lat);
  std::getline(in, line);
  std::vector<bool> seen(lat.size(), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Mode n{};
    double re = 0, im = 0;
    char c1, c2, c3, c4;
    if (!(row >> n[0] >> c1 >> n[1] >> c2 >> n[2] >> c3 >> re >> c4 >> im)) throw ConfigError("bad field CSV row: " + line);
    const long i = lat.find(n);
    if (i < 0) throw ShapeError("field CSV mode outside the lattice");
    f[std::size_t(i)] = {re, im};
    seen[std::size_t(i)] = true;
  }
  for (bool s : seen)
    if (!s) throw ShapeError("field CSV is missing modes");
  return f;
}

void write_density(std::ostream& out, const DensityMatrix& g) {
  out.write("GPHD", 4);
  put_i32(out, g.order());
  put_i32(out, g.lattice().cutoff());
  put_i32(out, ModeLattice::kOrderingVersion);
  put_i32(out, kDensityConventionVersion);
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = g.coeffs();
  put_cplx(out, rm.data(), std::size_t(rm.size()));
}

DensityMatrix read_density(std::istream& in) {
  expect_magic(in, "GPHD");
  const int k = get_i32(in);
  const ModeLattice lat(get_i32(in));
  expect_ordering(get_i32(in));
  const int conv = get_i32(in);
  if (conv != kDensityConventionVersion) throw ConfigError("unsupported density convention version " + std::to_string(conv));
  DensityMatrix g(lat, k);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(g.dim(), g.dim());
  get_cplx(in, rm.data(), std::size_t(rm.size()));
  g.coeffs() = rm;
  return g;
}

void save_field(const std::filesystem::path& path, const TorusField& f) {
  auto out = open_out(path);
  if (path.extension() == ".csv")
    write_field_csv(out, f);
  else
    write_field(out, f);
}

TorusField load_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return path.extension() == ".csv" ? read_field_csv(in) : read_field(in);
}

void save_density(const std::filesystem::path& path, const DensityMatrix& g) {
  auto out = open_out(path);
  write_density(out, g);
}

DensityMatrix load_density(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_density(in);
}

}  // namespace gph
