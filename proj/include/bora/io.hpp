#pragma once

#include <map>
#include <string>
#include <vector>

#include "bora/dag.hpp"
#include "bora/model.hpp"

namespace bora {

// CSV with header x,y[,value][,covariates...]. Exact duplicate coordinates
// are dropped (first row wins) with a warning on stderr.
struct PointsFile {
  std::vector<Location> locations;
  Eigen::VectorXd values;  // empty when the file has no value column
  Eigen::MatrixXd covariates;
  std::vector<std::string> covariate_names;
  int dropped_duplicates = 0;
};

PointsFile load_points_csv(const std::string& path, bool require_value);

Dataset to_dataset(const PointsFile& pf);

void write_edges_csv(const std::string& path, const ReferenceDag& dag);

void write_prediction_csv(const std::string& path,
                          const PredictionResult& pred);

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);

// Chain checkpoint: "BORACHN1", dims as int64, then native-endian doubles.
void save_chain(const std::string& path, const McmcChain& chain);
McmcChain load_chain(const std::string& path);

// Flat key=value lines; '#' starts a comment.
std::map<std::string, std::string> load_config(const std::string& path);

double config_double(const std::map<std::string, std::string>& cfg,
                     const std::string& key, double fallback);
long config_long(const std::map<std::string, std::string>& cfg,
                 const std::string& key, long fallback);
std::string config_str(const std::map<std::string, std::string>& cfg,
                       const std::string& key, const std::string& fallback);

}  // namespace bora
