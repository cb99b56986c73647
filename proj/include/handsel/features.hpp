#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handsel/dates.hpp"
#include "handsel/matrix.hpp"
#include "handsel/records.hpp"
#include "handsel/strength.hpp"

namespace handsel {

inline constexpr int kNumFeatures = 37;  // with the four strength columns
inline constexpr int kNumClassical = 33; // without them

// Canonical column order; the first 33 are the classical block, the last
// four the strengths. Every CSV and model uses exactly this order.
const std::vector<std::string>& all_feature_names();
std::vector<std::string> feature_names(bool include_sel);

double haversine_km(double lat_a, double lon_a, double lat_b, double lon_b);

enum class Outcome { HomeWin, Draw, AwayWin };
std::string_view outcome_name(Outcome o);
Outcome parse_outcome(const std::string& text);

struct TargetPair {
    int home_goals = 0;
    int away_goals = 0;
    Outcome outcome = Outcome::Draw;

    bool operator==(const TargetPair&) const = default;
};

TargetPair make_targets(const MatchRecord& match);

enum class Stat { height, weight, age };
enum class Moment { avg, std_dev };

// Mean or unbiased standard deviation of a body stat over one positional
// group; std of a singleton is 0; empty group yields nullopt (imputed later).
std::optional<double> squad_aggregate(std::span<const PlayerRecord* const> squad, Position pos,
                                      Stat stat, Moment moment, const Date& as_of);

struct FeatureRow {
    std::string match_id;
    std::vector<double> values; // NaN marks a value pending imputation
};

// Joins rosters, geography and strengths into feature rows.
class FeatureBuilder {
public:
    // strengths may be null only when every build() call has include_sel=false
    FeatureBuilder(std::vector<TeamRecord> teams, std::vector<PlayerRecord> players,
                   StrengthProvider* strengths);

    FeatureRow build(const MatchRecord& match, bool include_sel);

private:
    const TeamRecord& team(const std::string& team_id) const;
    std::vector<const PlayerRecord*> roster(const std::string& team_id,
                                            const std::string& season) const;

    std::vector<TeamRecord> teams_;
    std::vector<PlayerRecord> players_;
    std::map<std::string, std::size_t> team_index_;
    std::map<std::pair<std::string, std::string>, std::vector<const PlayerRecord*>> rosters_;
    StrengthProvider* strengths_;
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::string> match_ids;
    Matrix features;
    std::vector<std::optional<TargetPair>> targets; // nullopt = future fixture
    std::vector<std::string> issues;                // skipped matches, with reasons
};

// require_targets drops score-less fixtures (training); otherwise they are
// kept with empty targets (prediction).
Dataset assemble_dataset(std::span<const MatchRecord> matches, FeatureBuilder& builder,
                         bool include_sel, bool require_targets);

// Training-split medians for feature values that could not be computed.
struct ImputationTable {
    std::vector<std::string> names;
    std::vector<double> medians;
};

ImputationTable fit_imputation(const Dataset& train);
int apply_imputation(Dataset& dataset, const ImputationTable& table); // rows filled

void write_dataset(const std::string& path, const Dataset& dataset);
Dataset read_dataset(const std::string& path);

} // namespace handsel
