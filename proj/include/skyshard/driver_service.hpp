#pragma once

#include <memory>

#include "skyshard/driver.hpp"
#include "skyshard/net.hpp"

namespace skyshard {

/// Wire handler of the driver service: PING, SUBMIT_QUERY, plus PUT_OBJECT
/// (plain dataset name + table object, runs write_table), GET_OBJECT
/// (rendered object name) and BUILD_INDEX (plain dataset name).
net::Handler driver_handler(std::shared_ptr<Driver> driver, PartitionPolicy policy = {});

}  // namespace skyshard
