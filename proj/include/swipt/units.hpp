// SPDX-License-Identifier: Apache-2.0
//
// swipt-ee — energy-efficient resource allocation for multiuser OFDM downlinks
// with simultaneous wireless information and power transfer
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SWIPT_UNITS_HPP
#define SWIPT_UNITS_HPP

#include <cmath>
#include <stdexcept>

namespace swipt {

// Link budgets are quoted in dB/dBm, the model runs in linear units.

inline double dbm_to_watt(double dbm)
{
    if (!std::isfinite(dbm))
        throw std::invalid_argument("dbm_to_watt: power in dBm must be finite");
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double watt_to_dbm(double watt)
{
    if (!(watt > 0.0))
        throw std::invalid_argument("watt_to_dbm: power must be positive");
    return 10.0 * std::log10(watt) + 30.0;
}

inline double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double lin)
{
    if (!(lin > 0.0))
        throw std::invalid_argument("linear_to_db: ratio must be positive");
    return 10.0 * std::log10(lin);
}

} // namespace swipt

#endif
