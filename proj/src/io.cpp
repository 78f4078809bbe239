#include "ouspec/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ouspec/error.hpp"

namespace ou::io {

namespace {

constexpr std::array<char, 4> kMagic{'O', 'U', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf{};
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf.data(), buf.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  require(bool(is), ErrorKind::io, "truncated binary record");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double x) { put_le(os, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

void write_record(std::ostream& os, const BasisSpec& spec, const TimeGrid* grid,
                  const std::vector<const SpectralField*>& states) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, spec.dimension);
  put_le<std::uint32_t>(os, spec.max_degree);
  put_le<std::uint32_t>(os, spec.nodes_per_axis);
  put_le<std::uint32_t>(os, grid ? grid->n : 0);
  if (grid) {
    put_f64(os, grid->t0);
    put_f64(os, grid->t1);
  }
  put_le<std::uint64_t>(os, spec.mode_count());
  for (const auto* s : states) {
    for (const cplx& c : s->coeffs) {
      put_f64(os, c.real());
      put_f64(os, c.imag());
    }
  }
  require(bool(os), ErrorKind::io, "write failed");
}

struct Record {
  BasisSpec spec;
  std::optional<TimeGrid> grid;
  std::vector<SpectralField> states;
};

Record read_record(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  require(bool(is) && magic == kMagic, ErrorKind::io, "not an OUSF record");
  const auto version = get_le<std::uint32_t>(is);
  require(version == kVersion, ErrorKind::io, "unsupported OUSF version " + std::to_string(version));
  Record rec;
  rec.spec.dimension = static_cast<int>(get_le<std::uint32_t>(is));
  rec.spec.max_degree = static_cast<int>(get_le<std::uint32_t>(is));
  rec.spec.nodes_per_axis = static_cast<int>(get_le<std::uint32_t>(is));
  rec.spec.validate();
  const auto n_times = get_le<std::uint32_t>(is);
  if (n_times > 0) {
    TimeGrid g;
    g.n = static_cast<int>(n_times);
    g.t0 = get_f64(is);
    g.t1 = get_f64(is);
    g.validate();
    rec.grid = g;
  }
  const auto modes = get_le<std::uint64_t>(is);
  require(modes == rec.spec.mode_count(), ErrorKind::dimension_mismatch,
          "mode count does not match the basis header");
  const std::size_t n_states = n_times > 0 ? n_times : 1;
  rec.states.reserve(n_states);
  for (std::size_t j = 0; j < n_states; ++j) {
    SpectralField f = SpectralField::zero(rec.spec);
    for (auto& c : f.coeffs) {
      const double re = get_f64(is);
      c = cplx(re, get_f64(is));
    }
    rec.states.push_back(std::move(f));
  }
  return rec;
}

json coeffs_to_json(const std::vector<cplx>& c) {
  json a = json::array();
  for (const auto& z : c) a.push_back({z.real(), z.imag()});
  return a;
}

std::vector<cplx> coeffs_from_json(const json& a, std::size_t expected) {
  require(a.is_array() && a.size() == expected, ErrorKind::dimension_mismatch,
          "coefficient list has the wrong length");
  std::vector<cplx> out;
  out.reserve(expected);
  for (const auto& z : a) {
    require(z.is_array() && z.size() == 2, ErrorKind::data_error, "coefficients are [re, im] pairs");
    out.emplace_back(z[0].get<double>(), z[1].get<double>());
  }
  return out;
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

// nlohmann throws its own exception types; surface them as configuration errors.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_parameter, std::string("malformed document: ") + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json to_json(const BasisSpec& spec) {
  return {{"dimension", spec.dimension}, {"max_degree", spec.max_degree}, {"nodes_per_axis", spec.nodes_per_axis}};
}

BasisSpec basis_from_json(const json& j) {
  return guarded([&] {
    BasisSpec s{j.at("dimension").get<int>(), j.at("max_degree").get<int>(), j.at("nodes_per_axis").get<int>()};
    s.validate();
    return s;
  });
}

json to_json(const SpectralField& f) {
  return {{"basis", to_json(f.spec)}, {"coeffs", coeffs_to_json(f.coeffs)}};
}

SpectralField field_from_json(const json& j) {
  return guarded([&] {
    SpectralField f;
    f.spec = basis_from_json(j.at("basis"));
    f.coeffs = coeffs_from_json(j.at("coeffs"), f.spec.mode_count());
    return f;
  });
}

json to_json(const Trajectory& t) {
  json states = json::array();
  for (const auto& s : t.states) states.push_back(coeffs_to_json(s.coeffs));
  return {{"basis", to_json(t.states.front().spec)},
          {"grid", {{"t0", t.grid.t0}, {"t1", t.grid.t1}, {"n", t.grid.n}}},
          {"states", std::move(states)}};
}

Trajectory trajectory_from_json(const json& j) {
  return guarded([&] {
    const BasisSpec spec = basis_from_json(j.at("basis"));
    const auto& g = j.at("grid");
    Trajectory t{TimeGrid{g.at("t0").get<double>(), g.at("t1").get<double>(), g.at("n").get<int>()}, {}};
    t.grid.validate();
    const auto& st = j.at("states");
    require(st.is_array() && st.size() == static_cast<std::size_t>(t.grid.n), ErrorKind::dimension_mismatch,
            "state count does not match the time grid");
    for (const auto& s : st) t.states.push_back(SpectralField{spec, coeffs_from_json(s, spec.mode_count())});
    return t;
  });
}

void write_binary(std::ostream& os, const SpectralField& f) { write_record(os, f.spec, nullptr, {&f}); }

void write_binary(std::ostream& os, const Trajectory& t) {
  t.validate();
  std::vector<const SpectralField*> ptrs;
  for (const auto& s : t.states) ptrs.push_back(&s);
  write_record(os, t.states.front().spec, &t.grid, ptrs);
}

SpectralField read_binary_field(std::istream& is) {
  Record rec = read_record(is);
  require(!rec.grid, ErrorKind::io, "record holds a trajectory, not a single field");
  return std::move(rec.states.front());
}

Trajectory read_binary_trajectory(std::istream& is) {
  Record rec = read_record(is);
  require(rec.grid.has_value(), ErrorKind::io, "record holds a single field, not a trajectory");
  return Trajectory{*rec.grid, std::move(rec.states)};
}

namespace {

bool is_json_path(const std::filesystem::path& p) { return p.extension() == ".json"; }

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  require(bool(os), ErrorKind::io, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  require(bool(is), ErrorKind::io, "cannot open " + path.string());
  return is;
}

}  // namespace

void save_field(const std::filesystem::path& path, const SpectralField& f) {
  if (is_json_path(path)) {
    write_text_file(path, to_json(f).dump(1) + "\n");
    return;
  }
  auto os = open_out(path, true);
  write_binary(os, f);
}

SpectralField load_field(const std::filesystem::path& path) {
  if (is_json_path(path)) return field_from_json(read_json_file(path));
  auto is = open_in(path, true);
  return read_binary_field(is);
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& t) {
  if (is_json_path(path)) {
    write_text_file(path, to_json(t).dump(1) + "\n");
    return;
  }
  auto os = open_out(path, true);
  write_binary(os, t);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  if (is_json_path(path)) return trajectory_from_json(read_json_file(path));
  auto is = open_in(path, true);
  return read_binary_trajectory(is);
}

json to_json(const PicardReport& rep) {
  json fam = json::array();
  for (std::size_t i = 0; i < rep.family.size(); ++i) {
    fam.push_back({{"pair", rep.family[i].label()},
                   {"norm", i < rep.s_norm_members.size() ? rep.s_norm_members[i] : 0.0}});
  }
  return {{"regime", to_string(rep.regime)},
          {"norm", rep.norm_name},
          {"converged", rep.converged},
          {"iterations", rep.iterations},
          {"monotone", rep.monotone},
          {"residuals", rep.residuals},
          {"contraction_ratios", rep.contraction_ratios},
          {"tail_ratio", rep.tail_ratio},
          {"duhamel_residual", rep.duhamel_residual},
          {"duhamel_gain", rep.duhamel_gain},
          {"smallness_surrogate", rep.smallness_surrogate},
          {"s_norm_members", std::move(fam)}};
}

ProblemDocument parse_problem(const json& j, const std::filesystem::path& base_dir) {
  return guarded([&] {
    ProblemDocument doc;
    NLSProblem& pr = doc.problem;
    pr.p = j.at("p").get<double>();
    pr.mu = field_or(j, "mu", 1);
    pr.basis = BasisSpec{field_or(j, "dimension", 1), field_or(j, "max_degree", 24), field_or(j, "nodes_per_axis", 32)};
    pr.basis.validate();
    const double T = field_or(j, "T", 0.3);
    const int nodes = field_or(j, "time_nodes", 61);
    require(T > 0.0 && T <= 0.5 * M_PI + 1e-12, ErrorKind::invalid_parameter, "T must lie in (0, pi/2]");
    require(nodes >= 3 && nodes % 2 == 1, ErrorKind::invalid_parameter, "time_nodes must be odd and >= 3");
    pr.interval = TimeGrid::symmetric(T, nodes);
    pr.tol = field_or(j, "tol", pr.tol);
    pr.max_iter = field_or(j, "max_iter", pr.max_iter);
    pr.delta = field_or(j, "delta", pr.delta);

    const json& u0 = j.at("u0");
    if (u0.contains("file")) {
      std::filesystem::path p = u0.at("file").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      const SpectralField raw = load_field(p);
      require(raw.spec.dimension == pr.basis.dimension && raw.spec.max_degree <= pr.basis.max_degree,
              ErrorKind::dimension_mismatch, "u0 file basis does not embed in the problem basis");
      pr.u0 = raw.spec == pr.basis ? raw : rebase(raw, pr.basis);
    } else {
      pr.u0 = SpectralField::zero(pr.basis);
      const auto basis = basis_for(pr.basis);
      for (const auto& m : u0.at("modes")) {
        const MultiIndex alpha(m.at("alpha").get<std::vector<int>>());
        const auto& modes = basis->modes();
        const auto it = std::find(modes.begin(), modes.end(), alpha);
        require(it != modes.end(), ErrorKind::invalid_parameter, "u0 mode outside the truncated basis");
        pr.u0.coeffs[it - modes.begin()] += cplx(field_or(m, "re", 0.0), field_or(m, "im", 0.0));
      }
    }
    if (u0.contains("l2_norm")) {
      const double target = u0.at("l2_norm").get<double>();
      const double now = pr.u0.l2_norm();
      require(target >= 0.0, ErrorKind::invalid_parameter, "l2_norm must be non-negative");
      require(now > 0.0 || target == 0.0, ErrorKind::invalid_parameter, "cannot rescale zero data to a positive norm");
      if (now > 0.0) pr.u0 *= cplx(target / now);
    }

    if (j.contains("critical")) {
      const json& c = j.at("critical");
      CriticalSettings cs;
      cs.eta = field_or(c, "eta", cs.eta);
      cs.auto_interval = field_or(c, "auto_interval", cs.auto_interval);
      cs.smallness_nodes = field_or(c, "smallness_nodes", nodes);
      doc.critical = cs;
    }
    return doc;
  });
}

ProblemDocument load_problem(const std::filesystem::path& path) {
  return parse_problem(read_json_file(path), path.parent_path());
}

json to_json(const ProblemDocument& doc) {
  const NLSProblem& pr = doc.problem;
  json modes = json::array();
  const auto basis = basis_for(pr.basis);
  for (std::size_t i = 0; i < pr.u0.coeffs.size(); ++i) {
    const cplx c = pr.u0.coeffs[i];
    if (c == cplx{}) continue;
    modes.push_back({{"alpha", basis->modes()[i].degrees()}, {"re", c.real()}, {"im", c.imag()}});
  }
  json j = {{"p", pr.p},
            {"mu", pr.mu},
            {"dimension", pr.basis.dimension},
            {"max_degree", pr.basis.max_degree},
            {"nodes_per_axis", pr.basis.nodes_per_axis},
            {"T", pr.interval.t1},
            {"time_nodes", pr.interval.n},
            {"tol", pr.tol},
            {"max_iter", pr.max_iter},
            {"delta", pr.delta},
            {"u0", {{"modes", std::move(modes)}}}};
  if (doc.critical) {
    j["critical"] = {{"eta", doc.critical->eta},
                     {"auto_interval", doc.critical->auto_interval},
                     {"smallness_nodes", doc.critical->smallness_nodes}};
  }
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  auto is = open_in(path, false);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_parameter, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path, false);
  os << text;
  require(bool(os), ErrorKind::io, "write failed for " + path.string());
}

}  // namespace ou::io
