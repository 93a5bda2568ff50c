#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include "modem/types.hpp"

namespace modem {

/// Append-only JSONL accounting log, one UsageRecord per line. append is
/// linearizable: records from concurrent handlers land whole and in
/// arrival order.
class UsageLog {
public:
    /// Opens (creating if needed) the log for appending. Throws IoError.
    explicit UsageLog(const std::filesystem::path& path);

    void append(const UsageRecord& record);

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream file_;
    std::mutex mutex_;
};

/// Reads a usage log back into memory. Throws IoError on unreadable
/// files and SchemaError on lines that do not parse as UsageRecord.
std::vector<UsageRecord> read_usage_log(const std::filesystem::path& path);

}  // namespace modem
