// Copyright 2026 The Script Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef SCRIPT_SCRIPT_HPP_
#define SCRIPT_SCRIPT_HPP_

#include "script/analysis.hpp"
#include "script/common.hpp"
#include "script/fusion.hpp"
#include "script/gsp.hpp"
#include "script/oracle.hpp"
#include "script/qcsp.hpp"
#include "script/rng.hpp"
#include "script/similarity.hpp"
#include "script/synth.hpp"
#include "script/tensor_io.hpp"
#include "script/verify.hpp"

#endif  // SCRIPT_SCRIPT_HPP_
