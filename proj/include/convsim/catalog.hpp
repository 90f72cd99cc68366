#pragma once

#include "convsim/config.hpp"
#include "convsim/matrix.hpp"
#include "convsim/rng.hpp"

namespace convsim {

// Per-product embedding tables: organic view behaviour, click behaviour, and
// conversion behaviour. Immutable after construction, shareable across episodes.
struct ProductCatalog {
    Matrix organic_embed;     // P x K
    Matrix click_embed;       // P x K
    Matrix conversion_embed;  // P x K

    int num_products() const { return organic_embed.rows(); }
    int embed_dim() const { return organic_embed.cols(); }
};

// Organic and click rows are i.i.d. standard Gaussian. Conversion rows mix the
// organic row with fresh noise: rho = 1 reproduces organic taste exactly,
// rho = 0 decouples purchase behaviour from browsing behaviour.
ProductCatalog sample_catalog(const EnvConfig& config, RngStream& rng);

}  // namespace convsim
