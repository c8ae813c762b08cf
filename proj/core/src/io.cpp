#include "pfgb/io.hpp"

#include <bit>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pfgb/error.hpp"

namespace pfgb {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream os(path, std::ios::out | std::ios::trunc | mode);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream is(path, std::ios::in | mode);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  return is;
}

std::string_view value_of(std::string_view line, std::string_view key) {
  const std::string pat = " " + std::string(key) + "=";
  const auto pos = line.find(pat);
  if (pos == std::string_view::npos) throw InvalidArgument("grid header: missing " + std::string(key));
  std::string_view rest = line.substr(pos + pat.size());
  return rest.substr(0, rest.find(' '));
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidArgument("bad integer '" + std::string(s) + "'");
  return v;
}

GridSpec grid_from_parts(int dim, std::string_view shape, double dx) {
  GridSpec g;
  g.dim = dim;
  g.dx = dx;
  const auto x = shape.find('x');
  if (dim == 1) {
    if (x != std::string_view::npos) throw InvalidArgument("grid: 1D shape must be a single extent");
    g.shape = {parse_int(shape), 1};
  } else if (dim == 2) {
    if (x == std::string_view::npos) throw InvalidArgument("grid: 2D shape must be <n1>x<n2>");
    g.shape = {parse_int(shape.substr(0, x)), parse_int(shape.substr(x + 1))};
  } else {
    throw InvalidArgument("grid: dim must be 1 or 2");
  }
  g.validate();
  return g;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Provenance::comment_line() const { return "# digest=" + digest + " seed=" + std::to_string(seed); }

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidArgument("bad number '" + std::string(s) + "'");
  return v;
}

std::string grid_header(const GridSpec& grid) {
  return "# grid dim=" + std::to_string(grid.dim) + " shape=" + grid.shape_string() + " dx=" + format_double(grid.dx);
}

GridSpec parse_grid_header(std::string_view line) {
  if (line.substr(0, 7) != "# grid ") throw InvalidArgument("snapshot: first line must start with '# grid '");
  return grid_from_parts(parse_int(value_of(line, "dim")), value_of(line, "shape"),
                         parse_double(value_of(line, "dx")));
}

void write_snapshot_csv(std::ostream& os, const ScalarField& f, const Provenance& prov) {
  os << grid_header(f.grid()) << '\n' << prov.comment_line() << '\n';
  for (double v : f.values()) os << format_double(v) << '\n';
}

void write_snapshot_csv(const std::filesystem::path& path, const ScalarField& f, const Provenance& prov) {
  auto os = open_out(path);
  write_snapshot_csv(os, f, prov);
  if (!os) throw InvalidArgument("write failed: " + path.string());
}

ScalarField read_snapshot_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("snapshot: empty input");
  const GridSpec grid = parse_grid_header(line);
  std::vector<double> vals;
  vals.reserve(grid.size());
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    vals.push_back(parse_double(line));
  }
  if (vals.size() != grid.size())
    throw InvalidArgument("snapshot: expected " + std::to_string(grid.size()) + " values, got " +
                          std::to_string(vals.size()));
  return ScalarField(grid, std::move(vals));
}

ScalarField read_snapshot_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_snapshot_csv(is);
}

void write_snapshot_raw(const std::filesystem::path& path, const ScalarField& f, const Provenance& prov) {
  {
    auto os = open_out(path, std::ios::binary);
    for (double v : f.values()) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
      os.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!os) throw InvalidArgument("write failed: " + path.string());
  }
  boost::property_tree::ptree meta;
  meta.put("grid.dim", f.grid().dim);
  meta.put("grid.shape", f.grid().shape_string());
  meta.put("grid.dx", format_double(f.grid().dx));
  meta.put("grid.layout", "row-major");
  meta.put("grid.encoding", "f64le");
  meta.put("provenance.digest", prov.digest);
  meta.put("provenance.seed", prov.seed);
  auto ms = open_out(path.string() + ".meta");
  boost::property_tree::write_ini(ms, meta);
}

ScalarField read_snapshot_raw(const std::filesystem::path& path) {
  boost::property_tree::ptree meta;
  {
    auto ms = open_in(path.string() + ".meta");
    boost::property_tree::read_ini(ms, meta);
  }
  const GridSpec grid = grid_from_parts(meta.get<int>("grid.dim"), meta.get<std::string>("grid.shape"),
                                        parse_double(meta.get<std::string>("grid.dx")));
  auto is = open_in(path, std::ios::binary);
  std::vector<double> vals(grid.size());
  for (double& v : vals) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidArgument("raw snapshot truncated: " + path.string());
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    v = std::bit_cast<double>(bits);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw InvalidArgument("raw snapshot too long: " + path.string());
  return ScalarField(grid, std::move(vals));
}

EnergyLogWriter::EnergyLogWriter(std::ostream& os, const Provenance& prov) : os_(os) {
  os_ << prov.comment_line() << '\n' << kEnergyLogColumns << '\n';
}

void EnergyLogWriter::write_initial(const EnergyBreakdown& e, double linf_theta) {
  row(0, 0.0, e, 0.0, 0.0, 0, 0, 0.0, linf_theta);
}

void EnergyLogWriter::write(const StepReport& r) {
  row(r.step, r.t, r.energy, r.diss_v, r.diss_theta, r.vstep.outer_iters, r.thetastep.iters, r.max_box_violation,
      r.linf_theta);
}

void EnergyLogWriter::row(int step, double t, const EnergyBreakdown& e, double diss_v, double diss_theta, int outer,
                          int theta_iters, double box, double linf) {
  os_ << step << ',' << format_double(t) << ',' << format_double(e.dirichlet_v) << ',' << format_double(e.gamma_term)
      << ',' << format_double(e.g_term) << ',' << format_double(e.wtv_term) << ','
      << format_double(e.nu_dirichlet_term) << ',' << format_double(e.total) << ',' << format_double(diss_v) << ','
      << format_double(diss_theta) << ',' << outer << ',' << theta_iters << ',' << format_double(box) << ','
      << format_double(linf) << '\n';
}

}  // namespace pfgb
