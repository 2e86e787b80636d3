// Copyright 2026 The essrev Authors
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

#include <stdexcept>
#include <string>
#include <utility>

namespace essrev {

/// Base of every error thrown by the library. `module()` names the
/// subsystem that failed so front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

#define ESSREV_DEFINE_ERROR(Name, Module)                          \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(Module, what) {} \
  }

// lp_core
ESSREV_DEFINE_ERROR(StructuralError, "lp_core");
ESSREV_DEFINE_ERROR(NumericError, "lp_core");
ESSREV_DEFINE_ERROR(ContractError, "lp_core");
// device
ESSREV_DEFINE_ERROR(LookupError, "device");
// market_model
ESSREV_DEFINE_ERROR(ConstructionError, "market_model");
ESSREV_DEFINE_ERROR(ConsistencyError, "market_model");
ESSREV_DEFINE_ERROR(SettlementError, "market_model");
ESSREV_DEFINE_ERROR(SolutionContractError, "market_model");
// data_ingest
ESSREV_DEFINE_ERROR(SchemaError, "data_ingest");
ESSREV_DEFINE_ERROR(ParseError, "data_ingest");
ESSREV_DEFINE_ERROR(AlignmentError, "data_ingest");
ESSREV_DEFINE_ERROR(GapError, "data_ingest");
ESSREV_DEFINE_ERROR(SeriesError, "data_ingest");
// campaign
ESSREV_DEFINE_ERROR(CoverageError, "campaign");
ESSREV_DEFINE_ERROR(CampaignConfigError, "campaign");
ESSREV_DEFINE_ERROR(YearLookupError, "campaign");
// cli
ESSREV_DEFINE_ERROR(ConfigError, "cli");

#undef ESSREV_DEFINE_ERROR

}  // namespace essrev
