#include "replidyn/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace replidyn {

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

void write_orbit_csv(const Orbit& orbit, const std::filesystem::path& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(orbit.stored_rows()) * 32 * (orbit.m + 2));
  out += "n";
  for (int i = 1; i <= orbit.m; ++i) out += ",x" + std::to_string(i);
  out += ",drift\n";
  for (long r = 0; r < orbit.stored_rows(); ++r) {
    long step = orbit.row_steps[r];
    out += std::to_string(step);
    for (int c = 0; c < orbit.m; ++c) {
      out += ',';
      out += orbit.row_coord_string(r, c);
    }
    out += ',';
    // drift of the step producing this state; 0 for the initial row
    out += format_double(step == 0 ? 0.0 : orbit.drift[step - 1]);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_trapping_csv(const TrappingAnalysis& analysis, int region,
                        const std::filesystem::path& path) {
  if (region < 1 || region > 3) fail(ErrorKind::parameter, "write_trapping_csv: region in 1..3");
  const TrappingRecord& rec = analysis.records[region - 1];
  std::string out = "epoch,p,q,r,lambda_hat,mu_hat\n";
  // Rows follow the shared three-region epochs; the running ratios are this
  // region's finite-prefix statistics at that epoch index.
  long s_pairs = 0;  // sum of this region's (p_k + q_k) over k < n
  for (std::size_t n = 0; n < analysis.epochs.size(); ++n) {
    const auto& e = analysis.epochs[n];
    out += std::to_string(n + 1) + ',' + std::to_string(e[0]) + ',' + std::to_string(e[1]) + ',' +
           std::to_string(e[2]);
    if (n >= 1 && n < rec.p.size() && s_pairs > 0) {
      double lam = static_cast<double>(rec.p[n]) / s_pairs;
      out += ',' + format_double(lam);
      if (n < rec.q.size()) {
        double mu = static_cast<double>(rec.q[n]) / (s_pairs + rec.p[n]);
        out += ',' + format_double(mu);
      } else {
        out += ',';
      }
    } else {
      out += ",,";
    }
    out += '\n';
    if (n < rec.p.size() && n < rec.q.size()) s_pairs += rec.p[n] + rec.q[n];
  }
  write_file_atomic(path, out);
}

void write_averages_csv(const TimeAverageStack& stack, const std::filesystem::path& path) {
  const int m = stack.dim(), smax = stack.s_max();
  std::string out = "n,s";
  for (int i = 1; i <= m; ++i) out += ",a" + std::to_string(i);
  out += '\n';
  const std::vector<double>& rows = stack.thinned_rows();
  const std::size_t stride = 1 + static_cast<std::size_t>(smax) * m;
  for (long r = 0; r < stack.thinned_count(); ++r) {
    const double* row = rows.data() + r * stride;
    for (int s = 1; s <= smax; ++s) {
      out += std::to_string(static_cast<long>(row[0])) + ',' + std::to_string(s);
      for (int i = 0; i < m; ++i) out += ',' + format_double(row[1 + (s - 1) * m + i]);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

std::string fnv1a64_of_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace replidyn
