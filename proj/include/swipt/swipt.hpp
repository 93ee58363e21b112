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

#ifndef SWIPT_SWIPT_HPP
#define SWIPT_SWIPT_HPP

#include "channel.hpp"
#include "config.hpp"
#include "dinkelbach.hpp"
#include "dual_solver.hpp"
#include "experiments.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "system_params.hpp"
#include "units.hpp"

#endif
