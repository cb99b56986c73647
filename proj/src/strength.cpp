#include "handsel/strength.hpp"

#include <cmath>

#include "handsel/error.hpp"

namespace handsel {

namespace {

void check_strength_domain(const CmpParams& p) {
    if (!(p.lambda > 1.0)) {
        throw Error(ErrorCode::domain,
                    "strength undefined for lambda <= 1 (log is non-positive), got lambda=" +
                        std::to_string(p.lambda));
    }
    if (!(p.nu > 0.0)) {
        throw Error(ErrorCode::domain, "strength undefined for nu = 0");
    }
}

struct GoalWindow {
    std::vector<int> scored;
    std::vector<int> conceded;
};

// Finished matches of `team` strictly before as_of, in seasons >= min_season.
GoalWindow collect(std::span<const MatchRecord> matches, const std::string& team,
                   const Date& as_of, int min_season) {
    GoalWindow w;
    for (const auto& m : matches) {
        if (!m.home_goals || !m.away_goals) continue;
        const Date d = m.start_time.utc_date();
        if (!(d < as_of)) continue;
        if (season_start_year(d) < min_season) continue;
        if (m.home_team_id == team) {
            w.scored.push_back(*m.home_goals);
            w.conceded.push_back(*m.away_goals);
        } else if (m.away_team_id == team) {
            w.scored.push_back(*m.away_goals);
            w.conceded.push_back(*m.home_goals);
        }
    }
    return w;
}

// Fit-level failures that degrade to the league-mean imputation; anything
// else (config, io, ...) is a real bug and must propagate.
bool imputable(ErrorCode code) {
    switch (code) {
        case ErrorCode::insufficient_history:
        case ErrorCode::degenerate_sample:
        case ErrorCode::domain:
        case ErrorCode::divergence:
        case ErrorCode::truncation_failure:
            return true;
        default:
            return false;
    }
}

} // namespace

double attack_strength(const CmpParams& params) {
    check_strength_domain(params);
    return std::log(params.lambda) / params.nu;
}

double defense_strength(const CmpParams& params) {
    check_strength_domain(params);
    return params.nu / std::log(params.lambda);
}

TeamStrength strengths_asof(std::span<const MatchRecord> matches, const std::string& team,
                            const Date& as_of, const FitConfig& config) {
    config.validate();
    const int season = season_start_year(as_of);
    GoalWindow w = collect(matches, team, as_of, season);
    if (static_cast<int>(w.scored.size()) < config.min_samples) {
        w = collect(matches, team, as_of, season - 1);
    }
    if (static_cast<int>(w.scored.size()) < config.min_samples) {
        throw Error(ErrorCode::insufficient_history,
                    "team '" + team + "' has " + std::to_string(w.scored.size()) +
                        " finished matches before " + format_date(as_of) +
                        " in the ongoing+previous season, need " +
                        std::to_string(config.min_samples));
    }

    const FitResult att = fit_mle(w.scored, config);
    const FitResult def = fit_mle(w.conceded, config);
    for (const FitResult* fit : {&att, &def}) {
        // A lambda this close to 1 makes log(lambda) meaningless; refuse
        // instead of clamping so bad fits cannot poison the features.
        if (fit->params.lambda <= 1.0 + 1e-6) {
            throw Error(ErrorCode::domain,
                        "team '" + team + "': fitted lambda " +
                            std::to_string(fit->params.lambda) + " too close to 1");
        }
    }

    TeamStrength s;
    s.team_id = team;
    s.as_of = as_of;
    s.attack_params = att.params;
    s.defense_params = def.params;
    s.s_attack = attack_strength(att.params);
    s.s_defense = defense_strength(def.params);
    s.n_matches = static_cast<int>(w.scored.size());
    return s;
}

StrengthProvider::StrengthProvider(std::vector<MatchRecord> matches,
                                   std::vector<std::string> team_ids, FitConfig config)
    : matches_(std::move(matches)), team_ids_(std::move(team_ids)), config_(config) {
    config_.validate();
}

const TeamStrength& StrengthProvider::get(const std::string& team, const Date& as_of) {
    const auto key = std::pair(team, as_of);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    TeamStrength s;
    try {
        s = strengths_asof(matches_, team, as_of, config_);
    } catch (const Error& e) {
        if (!imputable(e.code())) throw;
        s = league_mean(as_of);
        s.team_id = team;
    }
    return cache_.emplace(key, std::move(s)).first->second;
}

const TeamStrength& StrengthProvider::league_mean(const Date& as_of) {
    if (const auto it = mean_cache_.find(as_of); it != mean_cache_.end()) return it->second;
    double sum_attack = 0.0;
    double sum_defense = 0.0;
    int n = 0;
    for (const auto& team : team_ids_) {
        try {
            const TeamStrength s = strengths_asof(matches_, team, as_of, config_);
            sum_attack += s.s_attack;
            sum_defense += s.s_defense;
            ++n;
        } catch (const Error& e) {
            if (!imputable(e.code())) throw;
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::insufficient_history,
                    "no team has enough history before " + format_date(as_of) +
                        " to impute league-mean strengths");
    }
    TeamStrength m;
    m.as_of = as_of;
    m.s_attack = sum_attack / n;
    m.s_defense = sum_defense / n;
    m.attack_params = {std::exp(m.s_attack), 1.0};
    m.defense_params = {std::exp(1.0), m.s_defense};
    m.n_matches = 0;
    m.imputed = true;
    return mean_cache_.emplace(as_of, std::move(m)).first->second;
}

} // namespace handsel
