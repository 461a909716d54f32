#include "attnav/trajectory.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "attnav/csv.hpp"
#include "attnav/error.hpp"

namespace attnav {

namespace {

constexpr std::string_view kMagic = "# attnav-trajectory";

void matrix_names(std::vector<std::string>& names, const std::string& prefix) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) names.push_back(prefix + "_" + std::to_string(r) + std::to_string(c));
  }
}

void vector_names(std::vector<std::string>& names, const std::string& prefix) {
  for (const char* axis : {"x", "y", "z"}) names.push_back(prefix + "_" + axis);
}

std::vector<std::string> column_names(int n) {
  std::vector<std::string> names{"t", "trial"};
  for (int i = 0; i < n; ++i) matrix_names(names, "R" + std::to_string(i + 1));
  matrix_names(names, "Rbar");
  matrix_names(names, "Rl");
  matrix_names(names, "Rr");
  vector_names(names, "dbar");
  vector_names(names, "dl");
  vector_names(names, "dr");
  vector_names(names, "wtilde");
  vector_names(names, "ws");
  vector_names(names, "wb");
  for (const char* name : {"e1", "e2", "omega_a_norm", "S_r", "S_rl", "I_h", "S_h", "V", "B", "h",
                           "on_boundary", "sym_min_eig", "pd"}) {
    names.emplace_back(name);
  }
  return names;
}

class RowWriter {
 public:
  explicit RowWriter(std::ostream& out) : out_(out) {}
  void num(double x) {
    sep();
    out_ << csv::format(x);
  }
  void integer(long x) {
    sep();
    out_ << x;
  }
  void mat(const Matrix3& m) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) num(m(r, c));
    }
  }
  void vec(const Vector3& v) {
    for (int i = 0; i < 3; ++i) num(v[i]);
  }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ostream& out_;
  bool first_ = true;
};

class RowReader {
 public:
  RowReader(const std::vector<std::string_view>& fields, const std::vector<std::string>& names)
      : fields_(fields), names_(names) {}
  double num() {
    const std::size_t i = next_++;
    return csv::parse_double(fields_[i], names_[i]);
  }
  long integer() {
    const std::size_t i = next_++;
    return csv::parse_long(fields_[i], names_[i]);
  }
  Matrix3 mat() {
    Matrix3 m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = num();
    }
    return m;
  }
  Vector3 vec() {
    Vector3 v;
    for (int i = 0; i < 3; ++i) v[i] = num();
    return v;
  }

 private:
  const std::vector<std::string_view>& fields_;
  const std::vector<std::string>& names_;
  std::size_t next_ = 0;
};

// "key=value" tokens of the metadata line.
std::string meta_value(const std::string& line, const std::string& key) {
  std::istringstream is(line);
  std::string token;
  while (is >> token) {
    if (token.rfind(key + "=", 0) == 0) return token.substr(key.size() + 1);
  }
  throw Error(Errc::ParseError, "trajectory metadata lacks " + key);
}

}  // namespace

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out) {
  out << kMagic << " v=1 n=" << record.n << " dt=" << csv::format(record.dt)
      << " k_s=" << csv::format(record.k_s) << " beta=" << csv::format(record.beta)
      << " aborted=" << (record.aborted ? 1 : 0) << '\n';
  if (record.aborted) out << "# abort_reason " << record.abort_reason << '\n';
  const auto names = column_names(record.n);
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  RowWriter w(out);
  for (const auto& row : record.rows) {
    if (static_cast<int>(row.bodies.size()) != record.n) {
      throw Error(Errc::InvalidArgument, "row body count does not match record");
    }
    w.num(row.t);
    w.integer(row.trial_id);
    for (const auto& b : row.bodies) w.mat(b);
    w.mat(row.rbar);
    w.mat(row.rl);
    w.mat(row.rr);
    w.vec(row.d_bar);
    w.vec(row.d_l);
    w.vec(row.d_r);
    w.vec(row.omega_tilde);
    w.vec(row.omega_s);
    w.vec(row.omega_b);
    w.num(row.error_e.x());
    w.num(row.error_e.y());
    w.num(row.omega_a_norm);
    w.num(row.s_r);
    w.num(row.s_rl);
    w.num(row.i_h);
    w.num(row.s_h);
    w.num(row.v);
    w.num(row.bound);
    w.num(row.h);
    w.integer(row.on_boundary ? 1 : 0);
    w.num(row.sym_min_eig);
    w.integer(row.positive_definite ? 1 : 0);
    w.end();
  }
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IOFailure, "cannot write " + path.string());
  write_trajectory_csv(record, out);
  if (!out) throw Error(Errc::IOFailure, "write failed for " + path.string());
}

TrajectoryRecord read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) {
    throw Error(Errc::ParseError, "not an attnav trajectory file");
  }
  TrajectoryRecord record;
  record.n = static_cast<int>(csv::parse_long(meta_value(line, "n"), "n"));
  record.dt = csv::parse_double(meta_value(line, "dt"), "dt");
  record.k_s = csv::parse_double(meta_value(line, "k_s"), "k_s");
  record.beta = csv::parse_double(meta_value(line, "beta"), "beta");
  record.aborted = meta_value(line, "aborted") == "1";
  if (record.n < 1) throw Error(Errc::ParseError, "trajectory needs n >= 1");

  while (std::getline(in, line) && line.rfind('#', 0) == 0) {
    const std::string tag = "# abort_reason ";
    if (line.rfind(tag, 0) == 0) record.abort_reason = line.substr(tag.size());
  }
  const auto names = column_names(record.n);
  const csv::Header header(line);
  if (header.names() != names) throw Error(Errc::ParseError, "unexpected trajectory header");

  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != names.size()) {
      throw Error(Errc::ParseError, "trajectory row has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(names.size()));
    }
    RowReader r(fields, names);
    TrajectoryRow row;
    row.t = r.num();
    row.trial_id = static_cast<int>(r.integer());
    row.bodies.resize(static_cast<std::size_t>(record.n));
    for (auto& b : row.bodies) b = r.mat();
    row.rbar = r.mat();
    row.rl = r.mat();
    row.rr = r.mat();
    row.d_bar = r.vec();
    row.d_l = r.vec();
    row.d_r = r.vec();
    row.omega_tilde = r.vec();
    row.omega_s = r.vec();
    row.omega_b = r.vec();
    row.error_e.x() = r.num();
    row.error_e.y() = r.num();
    row.omega_a_norm = r.num();
    row.s_r = r.num();
    row.s_rl = r.num();
    row.i_h = r.num();
    row.s_h = r.num();
    row.v = r.num();
    row.bound = r.num();
    row.h = r.num();
    row.on_boundary = r.integer() != 0;
    row.sym_min_eig = r.num();
    row.positive_definite = r.integer() != 0;
    record.rows.push_back(std::move(row));
  }
  return record;
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IOFailure, "cannot open " + path.string());
  return read_trajectory_csv(in);
}

}  // namespace attnav
