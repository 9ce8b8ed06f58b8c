// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header: the whole payload-security toolkit.
#pragma once

#include "paysec/bench.hpp"
#include "paysec/bytes.hpp"
#include "paysec/crypto.hpp"
#include "paysec/energy.hpp"
#include "paysec/envelope.hpp"
#include "paysec/errors.hpp"
#include "paysec/fixed_decimal.hpp"
#include "paysec/policy.hpp"
#include "paysec/reference_data.hpp"
#include "paysec/report.hpp"
#include "paysec/session.hpp"
#include "paysec/sim.hpp"
