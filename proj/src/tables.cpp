#include "impvo/tables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace impvo {

int Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return static_cast<int>(c);
  throw std::out_of_range("table has no column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw IoError("row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_csv(table);
  if (!out) throw IoError("failed writing " + path.string());
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

Table trajectory_table(const PiecewiseTrajectory& trajectory) {
  const Mesh& mesh = trajectory.mesh;
  const int n = trajectory.state_dim();
  const int N = mesh.impulse_count();
  Table t;
  t.header.push_back("t");
  for (int k = 1; k <= n; ++k) t.header.push_back("y_" + std::to_string(k));
  t.header.push_back("side");
  for (int p = 0; p < mesh.point_count(); ++p) {
    const int i = mesh.interval_of(p);
    const char* side = kSideNone;
    if (mesh.is_interval_end(p) && i < N) side = kSideLeft;
    if (mesh.is_interval_start(p) && i > 0) side = kSideRight;
    std::vector<std::string> row{format_number(mesh.time(p))};
    for (int k = 0; k < n; ++k) row.push_back(format_number(trajectory.states(k, p)));
    row.emplace_back(side);
    t.rows.push_back(std::move(row));
  }
  return t;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

namespace {

void fd_columns(std::vector<std::string>& row, bool has_fd, double value, double fd) {
  if (!has_fd) {
    row.insert(row.end(), {"", "", ""});
    return;
  }
  row.push_back(format_number(fd));
  row.push_back(format_number(std::abs(value - fd)));
  row.push_back(format_number(relative_error(value, fd)));
}

}  // namespace

Table gradient_tau_table(const GradientReport& report) {
  Table t{{"j", "dJ_dtau", "fd_dtau", "abs_err", "rel_err"}, {}};
  for (Eigen::Index j = 0; j < report.dJ_dtau.size(); ++j) {
    std::vector<std::string> row{std::to_string(j + 1), format_number(report.dJ_dtau(j))};
    fd_columns(row, report.has_fd, report.dJ_dtau(j), report.has_fd ? report.fd_dtau(j) : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table gradient_a_table(const GradientReport& report) {
  Table t{{"i", "k", "dJ_da", "fd_da", "abs_err", "rel_err"}, {}};
  for (std::size_t i = 0; i < report.dJ_da.size(); ++i)
    for (Eigen::Index k = 0; k < report.dJ_da[i].size(); ++k) {
      const double v = report.dJ_da[i](k);
      std::vector<std::string> row{std::to_string(i), std::to_string(k + 1), format_number(v)};
      fd_columns(row, report.has_fd, v, report.has_fd ? report.fd_da[i](k) : 0.0);
      t.rows.push_back(std::move(row));
    }
  return t;
}

Table gradient_terms_table(const GradientReport& report) {
  Table t{{"j", "hamiltonian_jump", "impulse_forcing", "explicit_tau", "moving_left_limit",
           "downstream_limits", "lift_correction", "total"},
          {}};
  for (std::size_t j = 0; j < report.tau_terms.size(); ++j) {
    const auto& x = report.tau_terms[j];
    t.rows.push_back({std::to_string(j + 1), format_number(x.hamiltonian_jump), format_number(x.impulse_forcing),
                      format_number(x.explicit_tau), format_number(x.moving_left_limit),
                      format_number(x.downstream_limits), format_number(x.lift_correction),
                      format_number(x.total())});
  }
  return t;
}

Table check_table(const std::vector<CheckResult>& checks) {
  Table t{{"name", "value", "threshold", "pass"}, {}};
  for (const auto& c : checks)
    t.rows.push_back({c.name, format_number(c.value), format_number(c.threshold), c.pass() ? "1" : "0"});
  return t;
}

Table trace_table(const OptimizationTrace& trace) {
  Table t;
  t.header.push_back("iteration");
  if (!trace.records.empty()) {
    const auto& r0 = trace.records.front();
    for (std::size_t j = 0; j < r0.tau.size(); ++j) t.header.push_back("tau_" + std::to_string(j + 1));
    for (std::size_t i = 0; i < r0.a.size(); ++i)
      for (Eigen::Index k = 0; k < r0.a[i].size(); ++k)
        t.header.push_back("a_" + std::to_string(i) + "_" + std::to_string(k + 1));
  }
  for (const char* h : {"J", "grad_tau_norm", "vi_residual", "tau_gap", "step", "M"}) t.header.push_back(h);
  for (const auto& r : trace.records) {
    std::vector<std::string> row{std::to_string(r.iteration)};
    for (double x : r.tau) row.push_back(format_number(x));
    for (const auto& a : r.a)
      for (Eigen::Index k = 0; k < a.size(); ++k) row.push_back(format_number(a(k)));
    row.push_back(format_number(r.cost));
    row.push_back(format_number(r.grad_tau_norm));
    row.push_back(format_number(r.vi_residual));
    row.push_back(format_number(r.tau_gap));
    row.push_back(format_number(r.step));
    row.push_back(std::to_string(r.mesh_points));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace impvo
