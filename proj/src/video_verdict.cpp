#include "gazefake/video_verdict.hpp"

#include <algorithm>
#include <cmath>

#include "gazefake/errors.hpp"

namespace gazefake {

std::string_view to_string(VoteScheme s) {
    switch (s) {
        case VoteScheme::Mean: return "mean";
        case VoteScheme::Majority: return "majority";
        case VoteScheme::Confidence: return "confidence";
        case VoteScheme::LogOdds: return "log_odds";
    }
    return "?";
}

VoteScheme parse_scheme(std::string_view name) {
    for (auto s : kAllSchemes)
        if (to_string(s) == name) return s;
    throw UsageError("unknown voting scheme '" + std::string(name) + "'");
}

VideoVerdict aggregate(std::span<const double> probs, VoteScheme scheme, std::string video_id) {
    if (probs.empty()) throw EmptyPrediction("video '" + video_id + "' has no sequence predictions");

    VideoVerdict v;
    v.video_id = std::move(video_id);
    v.scheme = scheme;
    v.sequence_probs.assign(probs.begin(), probs.end());

    const double n = static_cast<double>(probs.size());
    double acc = 0.0;
    bool fake = false;
    switch (scheme) {
        case VoteScheme::Mean:
            for (double p : probs) acc += std::clamp(p, kProbClamp, 1.0 - kProbClamp);
            v.score = acc / n;
            fake = v.score > 0.5;
            break;
        case VoteScheme::Majority: {
            std::size_t votes = 0;
            for (double p : probs) votes += std::clamp(p, kProbClamp, 1.0 - kProbClamp) > 0.5 ? 1 : 0;
            v.score = static_cast<double>(votes) / n;
            fake = 2 * votes > probs.size();
            break;
        }
        case VoteScheme::Confidence:
            for (double p : probs) acc += 2.0 * std::clamp(p, kProbClamp, 1.0 - kProbClamp) - 1.0;
            v.score = acc / n;
            fake = v.score > 0.0;
            break;
        case VoteScheme::LogOdds:
            for (double p : probs) {
                const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
                acc += std::log(q) - std::log1p(-q);
            }
            v.score = acc / n;
            fake = v.score > 0.0;
            break;
    }
    v.label = fake ? Label::Fake : Label::Real;
    return v;
}

}  // namespace gazefake
