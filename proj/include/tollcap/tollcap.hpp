#ifndef TOLLCAP_TOLLCAP_HPP_
#define TOLLCAP_TOLLCAP_HPP_

#include "tollcap/analysis.hpp"
#include "tollcap/capalg.hpp"
#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"
#include "tollcap/presets.hpp"
#include "tollcap/pricing.hpp"
#include "tollcap/validate.hpp"
#include "tollcap/wardrop.hpp"

#endif  // TOLLCAP_TOLLCAP_HPP_
