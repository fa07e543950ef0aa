#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlpsel/mle.hpp"
#include "mlpsel/selection.hpp"
#include "mlpsel/sim.hpp"
#include "mlpsel/theory.hpp"

namespace mlpsel::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of an IEEE double ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);

/// CSV with header x1,...,xd,y; '.' decimal separator; '\n' line endings.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
std::string dataset_csv(const Dataset& data);
/// Throws InvalidInput naming the offending line.
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);

json to_json(const Theta& theta);
Theta theta_from_json(const json& j);

json to_json(const FitResult& fit);
FitResult fit_from_json(const json& j);
json to_json(const std::vector<FitResult>& profile);
std::vector<FitResult> profile_from_json(const json& j);

json to_json(const SelectionResult& sel);
/// Header k,loglik,penalty,criterion.
std::string selection_table_csv(const SelectionResult& sel);

json to_json(const H4Report& rep);

/// Deterministic content only: wall-clock time and thread count are left out.
json to_json(const ExperimentResult& result);
/// Header penalty,n,k,frequency.
std::string frequency_csv(const FrequencyTable& table);
/// Header penalty,n,p_correct,p_over,failure_rate.
std::string consistency_curve_csv(const FrequencyTable& table);

/// Header direction,delta,D,R,R_over_D,flagged.
std::string remainder_csv(const std::vector<std::pair<std::string, std::vector<RemainderRow>>>& study);
/// Header row,col,value.
std::string gram_csv(const GramReport& rep);
json to_json(const GramReport& rep);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace mlpsel::io
