// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "easytime/codegen.hpp"
#include "easytime/frontend.hpp"
#include "easytime/store.hpp"

namespace easytime::testkit {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(EASYTIME_FIXTURE_DIR) / name;
}

inline std::string fixture_text(const std::string& name) { return store::read_file(fixture(name)); }

inline ast::Program triathlon() { return frontend::parse_source(fixture_text("double_triathlon.et")); }

inline codegen::CompiledProgram triathlon_compiled() { return *codegen::compile_program(triathlon()).program; }

}  // namespace easytime::testkit
