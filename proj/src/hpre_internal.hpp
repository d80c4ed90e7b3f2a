#pragma once

// Not installed. Test code uses this to observe the X sampled inside
// rekeygen; the public interface never returns it.

#include <utility>

#include "phr/hpre.hpp"

namespace phr::detail {

std::pair<ReEncryptionKey, TargetElem> rekeygen_exposing_x(const IdElem& sk_do, const ClcPublicKey& pk_du, Rng& rng);

}  // namespace phr::detail
