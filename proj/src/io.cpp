#include "bora/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

namespace bora {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) +
                     ": cannot parse number '" + s + "'");
  }
}

}  // namespace

PointsFile load_points_csv(const std::string& path, bool require_value) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open points file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  int xcol = -1, ycol = -1, vcol = -1;
  std::vector<int> covcols;
  PointsFile pf;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == "x")
      xcol = static_cast<int>(c);
    else if (name == "y")
      ycol = static_cast<int>(c);
    else if (name == "value")
      vcol = static_cast<int>(c);
    else if (!name.empty()) {
      covcols.push_back(static_cast<int>(c));
      pf.covariate_names.push_back(name);
    }
  }
  if (xcol < 0 || ycol < 0)
    throw ParseError(path + ": header must contain x and y columns");
  if (require_value && vcol < 0)
    throw ParseError(path + ": header must contain a value column");

  std::vector<Location> locs;
  std::vector<double> vals;
  std::vector<std::vector<double>> covs;
  std::unordered_set<std::uint64_t> seen;
  auto key_of = [](const Location& p) {
    const double x = p.x == 0.0 ? 0.0 : p.x;
    const double y = p.y == 0.0 ? 0.0 : p.y;
    std::uint64_t hx, hy;
    std::memcpy(&hx, &x, 8);
    std::memcpy(&hy, &y, 8);
    return hx * 0x9E3779B97F4A7C15ULL ^ (hy + (hx << 7) + 0x517CC1B727220A95ULL);
  };
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw ParseError("line " + std::to_string(lineno) + ": too few fields");
    Location p{parse_double(trim(cells[xcol]), lineno),
               parse_double(trim(cells[ycol]), lineno)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw NonFinite("line " + std::to_string(lineno) +
                      ": non-finite coordinate");
    // hash prefilter, exact confirm
    if (!seen.insert(key_of(p)).second) {
      bool dup = false;
      for (const Location& q : locs)
        if (q == p) {
          dup = true;
          break;
        }
      if (dup) {
        ++pf.dropped_duplicates;
        continue;
      }
    }
    locs.push_back(p);
    if (vcol >= 0) vals.push_back(parse_double(trim(cells[vcol]), lineno));
    std::vector<double> row;
    row.reserve(covcols.size());
    for (int c : covcols) row.push_back(parse_double(trim(cells[c]), lineno));
    covs.push_back(std::move(row));
  }
  if (pf.dropped_duplicates > 0)
    std::cerr << "warning: dropped " << pf.dropped_duplicates
              << " duplicate location(s) in " << path << "\n";
  pf.locations = std::move(locs);
  if (vcol >= 0) {
    pf.values.resize(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) pf.values[i] = vals[i];
  }
  pf.covariates.resize(static_cast<Eigen::Index>(covs.size()),
                       static_cast<Eigen::Index>(covcols.size()));
  for (std::size_t i = 0; i < covs.size(); ++i)
    for (std::size_t c = 0; c < covs[i].size(); ++c)
      pf.covariates(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(c)) = covs[i][c];
  return pf;
}

Dataset to_dataset(const PointsFile& pf) {
  Dataset d;
  d.locations = pf.locations;
  d.y = pf.values;
  d.X = pf.covariates;
  return d;
}

void write_edges_csv(const std::string& path, const ReferenceDag& dag) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "target,neighbor,provenance,distance\n";
  f.precision(17);
  for (std::size_t i = 0; i < dag.nbrs.size(); ++i) {
    const NeighborList& nl = dag.nbrs[i];
    for (std::size_t t = 0; t < nl.idx.size(); ++t)
      f << i << ',' << nl.idx[t] << ',' << provenance_name(nl.prov[t]) << ','
        << nl.dist[t] << '\n';
  }
}

void write_prediction_csv(const std::string& path,
                          const PredictionResult& pred) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "x,y,w_mean,w_sd,y_mean,y_sd,y_q025,y_q975\n";
  f.precision(17);
  for (std::size_t i = 0; i < pred.sites.size(); ++i)
    f << pred.sites[i].x << ',' << pred.sites[i].y << ',' << pred.w_mean[i]
      << ',' << pred.w_sd[i] << ',' << pred.y_mean[i] << ',' << pred.y_sd[i]
      << ',' << pred.y_lo[i] << ',' << pred.y_hi[i] << '\n';
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "parameter,mean,sd,q025,q500,q975,ess\n";
  f.precision(17);
  for (const SummaryRow& r : rows)
    f << r.name << ',' << r.mean << ',' << r.sd << ',' << r.q025 << ','
      << r.q500 << ',' << r.q975 << ',' << r.ess << '\n';
}

namespace {

constexpr char kMagic[9] = "BORACHN1";

void put_i64(std::ofstream& f, std::int64_t v) {
  f.write(reinterpret_cast<const char*>(&v), 8);
}
std::int64_t get_i64(std::ifstream& f) {
  std::int64_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
void put_doubles(std::ofstream& f, const double* p, std::size_t n) {
  f.write(reinterpret_cast<const char*>(p), 8 * n);
}
void get_doubles(std::ifstream& f, double* p, std::size_t n) {
  f.read(reinterpret_cast<char*>(p), 8 * n);
}

}  // namespace

void save_chain(const std::string& path, const McmcChain& chain) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f.write(kMagic, 8);
  const std::int64_t T = chain.draws();
  put_i64(f, chain.k);
  put_i64(f, chain.p);
  put_i64(f, T);
  put_i64(f, static_cast<std::int64_t>(chain.seed));
  const double header[4] = {chain.nu, chain.phi_lower, chain.phi_upper,
                            chain.accept_rate};
  put_doubles(f, header, 4);
  put_doubles(f, chain.beta.data(), chain.beta.size());
  put_doubles(f, chain.tau2.data(), T);
  put_doubles(f, chain.sigma2.data(), T);
  put_doubles(f, chain.phi.data(), T);
  put_doubles(f, chain.w.data(), chain.w.size());
  if (!f) throw IoError("short write to " + path);
}

McmcChain load_chain(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open chain file: " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ParseError(path + ": not a chain checkpoint");
  McmcChain chain;
  chain.k = static_cast<int>(get_i64(f));
  chain.p = static_cast<int>(get_i64(f));
  const std::int64_t T = get_i64(f);
  chain.seed = static_cast<std::uint64_t>(get_i64(f));
  if (chain.k <= 0 || chain.p < 0 || T <= 0)
    throw ParseError(path + ": corrupt checkpoint dimensions");
  double header[4];
  get_doubles(f, header, 4);
  chain.nu = header[0];
  chain.phi_lower = header[1];
  chain.phi_upper = header[2];
  chain.accept_rate = header[3];
  chain.beta.resize(chain.p + 1, T);
  chain.tau2.resize(T);
  chain.sigma2.resize(T);
  chain.phi.resize(T);
  chain.w.resize(chain.k, T);
  get_doubles(f, chain.beta.data(), chain.beta.size());
  get_doubles(f, chain.tau2.data(), T);
  get_doubles(f, chain.sigma2.data(), T);
  get_doubles(f, chain.phi.data(), T);
  get_doubles(f, chain.w.data(), chain.w.size());
  if (!f) throw ParseError(path + ": truncated checkpoint");
  return chain;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + " line " + std::to_string(lineno) +
                       ": expected key=value");
    cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

double config_double(const std::map<std::string, std::string>& cfg,
                     const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  return parse_double(it->second, 0);
}

long config_long(const std::map<std::string, std::string>& cfg,
                 const std::string& key, long fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw ParseError("config key " + key + ": cannot parse '" + it->second +
                     "'");
  }
}

std::string config_str(const std::map<std::string, std::string>& cfg,
                       const std::string& key, const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

}  // namespace bora
