// Copyright 2026 The gpt-thermo Authors
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
#pragma once

// Everything except the JSON layer (gpt_thermo/io.hpp), which needs nlohmann/json.

#include "gpt_thermo/cycles.hpp"
#include "gpt_thermo/entropy.hpp"
#include "gpt_thermo/info_thermo.hpp"
#include "gpt_thermo/measurement.hpp"
#include "gpt_thermo/spm.hpp"
#include "gpt_thermo/state.hpp"
#include "gpt_thermo/system.hpp"
