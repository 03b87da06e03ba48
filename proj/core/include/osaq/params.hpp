#pragma once

#include <string>

#include "osaq/errors.hpp"

namespace osaq {

enum class Protocol { Buffering, Switching };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

// Raw scenario constants as supplied by the user, before validation.
struct RawParams {
    int n_nodes = 1;          // N
    int n_data_channels = 1;  // M_C
    double p_c = 0.0;         // per-slot PU occupancy probability, any channel
    double eta = 1.0;         // data-channel capture probability
    double eta_c = 1.0;       // control-channel capture probability
    double lambda = 0.0;      // per-slot arrival probability
    double q = 1.0;           // geometric packet-length parameter
    double p = 1.0;           // Aloha access probability
    int qs_max = 1;           // buffer truncation limit
    Protocol protocol = Protocol::Buffering;
};

// Validated scenario with the derived per-slot probabilities. Immutable
// after construction; all solver entry points take it by const reference.
class SystemParams {
public:
    // Validates every field and populates chi, psi and s_max. Throws
    // validation_error naming the first offending field.
    static SystemParams derive(const RawParams& raw);

    int n_nodes() const noexcept { return raw_.n_nodes; }
    int n_data_channels() const noexcept { return raw_.n_data_channels; }
    double p_c() const noexcept { return raw_.p_c; }
    double eta() const noexcept { return raw_.eta; }
    double eta_c() const noexcept { return raw_.eta_c; }
    double lambda() const noexcept { return raw_.lambda; }
    double q() const noexcept { return raw_.q; }
    double p() const noexcept { return raw_.p; }
    int qs_max() const noexcept { return raw_.qs_max; }
    Protocol protocol() const noexcept { return raw_.protocol; }

    // chi = (1-p_c) * eta_c: per-slot success probability on the control channel.
    double chi() const noexcept { return chi_; }
    // psi = (1-p_c) * eta: per-slot success probability on a data channel.
    double psi() const noexcept { return psi_; }
    // s_max = min(N, M_C): maximum number of simultaneous links.
    int s_max() const noexcept { return s_max_; }

    RawParams raw() const noexcept { return raw_; }

    // Copy with one field changed, revalidated.
    SystemParams with_lambda(double lambda) const;
    SystemParams with_protocol(Protocol proto) const;

private:
    SystemParams() = default;

    RawParams raw_;
    double chi_ = 0.0;
    double psi_ = 0.0;
    int s_max_ = 0;
};

} // namespace osaq
