#include "mnrv/error.hpp"

#include <atomic>
#include <cstdio>

namespace mnrv {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::identification: return "identification";
    case ErrorKind::constraint: return "constraint";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    case ErrorKind::convergence: return "convergence";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

namespace {
void default_warning(const std::string& what) { std::fprintf(stderr, "warning: %s\n", what.c_str()); }
std::atomic<WarningHandler> g_handler{&default_warning};
}  // namespace

void set_warning_handler(WarningHandler h) { g_handler.store(h ? h : &default_warning); }
void warn(const std::string& what) { g_handler.load()(what); }

}  // namespace mnrv
