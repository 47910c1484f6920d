#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazefake/trackio.hpp"

namespace gazefake {

enum class VoteScheme { Mean, Majority, Confidence, LogOdds };

inline constexpr VoteScheme kAllSchemes[] = {VoteScheme::Mean, VoteScheme::Majority, VoteScheme::Confidence,
                                             VoteScheme::LogOdds};
inline constexpr double kProbClamp = 1e-6;

std::string_view to_string(VoteScheme s);
VoteScheme parse_scheme(std::string_view name);  // throws UsageError

struct VideoVerdict {
    std::string video_id;
    VoteScheme scheme = VoteScheme::LogOdds;
    double score = 0.0;
    Label label = Label::Real;  // real or fake only
    std::vector<double> sequence_probs;

    std::size_t n_sequences() const { return sequence_probs.size(); }
};

// Decision rules (ties resolve to real):
//   mean        score = mean(p),                   fake iff score > 0.5
//   majority    score = #{p > 0.5} / N,            fake iff #{p > 0.5} > N/2
//   confidence  score = mean(2p - 1),              fake iff score > 0
//   log_odds    score = mean(log(p / (1 - p))),    fake iff score > 0
// Probabilities are clamped to [1e-6, 1 - 1e-6] first. Throws EmptyPrediction on an empty list.
VideoVerdict aggregate(std::span<const double> probs, VoteScheme scheme, std::string video_id = {});

}  // namespace gazefake
