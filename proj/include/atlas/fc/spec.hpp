#ifndef ATLAS_FC_SPEC_HPP
#define ATLAS_FC_SPEC_HPP

#include <cstdint>
#include <string>

#include "atlas/errors.hpp"

namespace atlas::fc {

enum class Family { mlp, rnn, a_rnn, transformer, esn };
enum class Propagator { identity, koopman, node };

std::string to_string(Family f);
std::string to_string(Propagator p);
Family family_from_string(const std::string& s);
Propagator propagator_from_string(const std::string& s);

// Forecaster architecture + training seed. Desk-scale defaults; the encoder
// GRU hidden size equals the latent dim so the final hidden state is the
// latent itself.
struct ForecasterSpec {
    Family family = Family::mlp;
    Propagator propagator = Propagator::identity;
    int L = 20;
    int H = 50;
    int latent_dim = 32;
    int width = 64;   // mlp hidden width, node vector-field width, transformer FF width
    int depth = 2;    // mlp hidden layers
    int d_model = 64;
    int heads = 2;
    int layers = 2;   // transformer blocks per stack
    int reservoir_size = 256;
    double spectral_radius = 0.9;
    double input_scale = 2.0;
    double ridge_lambda = 0.3;
    double density = 0.1;  // reservoir connectivity
    std::uint64_t seed = 0;

    void validate() const;

    // Display id in the paper-style naming: mlp, k-mlp, n-mlp, rnn, a-rnn,
    // k-rnn, n-rnn, tf, k-tf, n-tf, esn.
    std::string name() const;
};

}  // namespace atlas::fc

#endif  // ATLAS_FC_SPEC_HPP
