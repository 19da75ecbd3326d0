#include "atlas/fc/spec.hpp"

namespace atlas::fc {

std::string to_string(Family f) {
    switch (f) {
        case Family::mlp: return "mlp";
        case Family::rnn: return "rnn";
        case Family::a_rnn: return "a_rnn";
        case Family::transformer: return "transformer";
        case Family::esn: return "esn";
    }
    return "?";
}

std::string to_string(Propagator p) {
    switch (p) {
        case Propagator::identity: return "identity";
        case Propagator::koopman: return "koopman";
        case Propagator::node: return "node";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "mlp") return Family::mlp;
    if (s == "rnn") return Family::rnn;
    if (s == "a_rnn" || s == "arnn") return Family::a_rnn;
    if (s == "transformer" || s == "tf") return Family::transformer;
    if (s == "esn") return Family::esn;
    throw ConfigError("unknown forecaster family '" + s + "'");
}

Propagator propagator_from_string(const std::string& s) {
    if (s == "identity") return Propagator::identity;
    if (s == "koopman") return Propagator::koopman;
    if (s == "node") return Propagator::node;
    throw ConfigError("unknown propagator '" + s + "'");
}

void ForecasterSpec::validate() const {
    if (latent_dim < 1) throw ConfigError("ForecasterSpec: latent_dim must be >= 1");
    if (H < 1) throw ConfigError("ForecasterSpec: H must be >= 1");
    if (L < 1) throw ConfigError("ForecasterSpec: L must be >= 1");
    if (family == Family::esn && propagator != Propagator::identity)
        throw ConfigError("ForecasterSpec: esn pairs only with the identity propagator");
    if (family == Family::transformer) {
        if (d_model % heads != 0) throw ConfigError("ForecasterSpec: d_model must be divisible by heads");
        if (layers < 1) throw ConfigError("ForecasterSpec: transformer needs at least one layer");
    }
    if (family == Family::esn && reservoir_size < 1)
        throw ConfigError("ForecasterSpec: reservoir_size must be >= 1");
}

std::string ForecasterSpec::name() const {
    std::string base;
    switch (family) {
        case Family::mlp: base = "mlp"; break;
        case Family::rnn: base = "rnn"; break;
        case Family::a_rnn: base = "a-rnn"; break;
        case Family::transformer: base = "tf"; break;
        case Family::esn: return "esn";
    }
    switch (propagator) {
        case Propagator::identity: return base;
        case Propagator::koopman: return "k-" + base;
        case Propagator::node: return "n-" + base;
    }
    return base;
}

}  // namespace atlas::fc
