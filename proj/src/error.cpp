#include "ratefix/error.hpp"

namespace ratefix {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ParseError: return "ParseError";
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::DuplicateSubmission: return "DuplicateSubmission";
        case Errc::TooFewBanks: return "TooFewBanks";
        case Errc::NonFiniteQuote: return "NonFiniteQuote";
        case Errc::EmptyAfterTrim: return "EmptyAfterTrim";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::DegeneratePanel: return "DegeneratePanel";
        case Errc::InvalidK: return "InvalidK";
        case Errc::PanelTooSmall: return "PanelTooSmall";
        case Errc::InvalidStrategyTarget: return "InvalidStrategyTarget";
    }
    return "Unknown";
}

}  // namespace ratefix
