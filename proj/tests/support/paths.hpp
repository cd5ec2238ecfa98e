#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testsupport {

inline std::filesystem::path data_dir() {
    return std::filesystem::path(GRIDFLOW_DATA_DIR);
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("missing fixture: " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testsupport
