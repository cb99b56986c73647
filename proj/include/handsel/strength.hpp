#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "handsel/cmp.hpp"
#include "handsel/dates.hpp"
#include "handsel/records.hpp"

namespace handsel {

struct TeamStrength {
    std::string team_id;
    Date as_of;
    double s_attack = 0.0;
    double s_defense = 0.0;
    CmpParams attack_params;  // fit of goals scored
    CmpParams defense_params; // fit of goals conceded
    int n_matches = 0;
    // League-mean fallback used; params are synthesized to stay consistent
    // with the strengths (attack nu=1, defense lambda=e).
    bool imputed = false;
};

// log(lambda)/nu — high for teams that score a lot, consistently.
double attack_strength(const CmpParams& params);
// nu/log(lambda) — high for teams that concede little, with low variance.
double defense_strength(const CmpParams& params);

// Fit both strengths from the team's finished matches strictly before as_of.
// Window: the ongoing season (July-to-June); when that holds fewer than
// config.min_samples matches, the previous season is pulled in as well.
TeamStrength strengths_asof(std::span<const MatchRecord> matches, const std::string& team,
                            const Date& as_of, const FitConfig& config = {});

// Memoizing facade; teams without enough history (or with degenerate fits)
// get the league-mean strengths, flagged as imputed.
class StrengthProvider {
public:
    StrengthProvider(std::vector<MatchRecord> matches, std::vector<std::string> team_ids,
                     FitConfig config = {});

    const TeamStrength& get(const std::string& team, const Date& as_of);

private:
    const TeamStrength& league_mean(const Date& as_of);

    std::vector<MatchRecord> matches_;
    std::vector<std::string> team_ids_;
    FitConfig config_;
    std::map<std::pair<std::string, Date>, TeamStrength> cache_;
    std::map<Date, TeamStrength> mean_cache_;
};

} // namespace handsel
