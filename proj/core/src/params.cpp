#include "osaq/params.hpp"

#include <algorithm>

namespace osaq {

std::string to_string(Protocol p) {
    return p == Protocol::Buffering ? "buffering" : "switching";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "buffering") return Protocol::Buffering;
    if (s == "switching") return Protocol::Switching;
    throw validation_error("protocol", "unknown protocol '" + s + "'");
}

namespace {

void check_prob(const char* field, double v, double lo, double hi,
                bool lo_open, bool hi_open) {
    const bool bad_lo = lo_open ? v <= lo : v < lo;
    const bool bad_hi = hi_open ? v >= hi : v > hi;
    if (bad_lo || bad_hi) {
        throw validation_error(field, "value " + std::to_string(v) +
                                          " outside admissible range");
    }
}

} // namespace

SystemParams SystemParams::derive(const RawParams& raw) {
    if (raw.n_nodes < 1) throw validation_error("n_nodes", "must be >= 1");
    if (raw.n_data_channels < 1) {
        throw validation_error("n_data_channels", "must be >= 1");
    }
    if (raw.qs_max < 1) throw validation_error("qs_max", "must be >= 1");
    check_prob("p_c", raw.p_c, 0.0, 1.0, false, false);
    check_prob("eta", raw.eta, 0.0, 1.0, true, false);
    check_prob("eta_c", raw.eta_c, 0.0, 1.0, true, false);
    check_prob("lambda", raw.lambda, 0.0, 1.0, false, true);
    check_prob("q", raw.q, 0.0, 1.0, true, false);
    check_prob("p", raw.p, 0.0, 1.0, true, false);

    SystemParams sp;
    sp.raw_ = raw;
    sp.chi_ = (1.0 - raw.p_c) * raw.eta_c;
    sp.psi_ = (1.0 - raw.p_c) * raw.eta;
    sp.s_max_ = std::min(raw.n_nodes, raw.n_data_channels);
    return sp;
}

SystemParams SystemParams::with_lambda(double lambda) const {
    RawParams r = raw_;
    r.lambda = lambda;
    return derive(r);
}

SystemParams SystemParams::with_protocol(Protocol proto) const {
    RawParams r = raw_;
    r.protocol = proto;
    return derive(r);
}

} // namespace osaq
