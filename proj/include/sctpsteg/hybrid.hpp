#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sctpsteg::hy {

struct HybridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExtensionDisabled : HybridError {
    ExtensionDisabled() : HybridError("partial reliability extension disabled") {}
};
struct FragmentationNotForced : HybridError {
    FragmentationNotForced()
        : HybridError("message size does not force fragmentation into >= 2 chunks") {}
};
struct NoTraffic : HybridError {
    NoTraffic() : HybridError("no carrier traffic") {}
};

enum class Variant {
    SkipResend,     // a DATA chunk is withheld, abandoned via FORWARD TSN,
                    // then sent late carrying the steganogram
    OrphanFragment, // a dummy message is fragmented; only the stego-bearing
                    // last fragment is sent, the rest abandoned
};

/// Covert schedule the simulator executes. Event selection is deterministic:
/// every floor(1/duty)-th DATA chunk transmission starts a covert event,
/// until the steganogram is exhausted.
struct HyPlan {
    Variant variant = Variant::SkipResend;
    std::vector<uint8_t> steganogram;
    double duty = 0.0001;
    size_t message_bytes = 0; // OrphanFragment: dummy message size (must fragment)

    uint64_t stride() const {
        if (duty <= 0.0 || duty > 1.0) throw HybridError("duty must be in (0, 1]");
        return uint64_t(1.0 / duty);
    }
};

} // namespace sctpsteg::hy
