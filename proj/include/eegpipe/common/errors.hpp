// SPDX-License-Identifier: Apache-2.0
//
// Error types thrown by the pipeline. Each maps to one failure mode of a
// public operation; the CLI translates them into exit codes.

#pragma once

#include <stdexcept>
#include <string>

namespace eegpipe {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define EEGPIPE_DEFINE_ERROR(Name)                                  \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

// core
EEGPIPE_DEFINE_ERROR(NonIntegerFactor);
EEGPIPE_DEFINE_ERROR(InvalidCutoff);
EEGPIPE_DEFINE_ERROR(WindowTooLong);
EEGPIPE_DEFINE_ERROR(WindowOutOfRange);

// features
EEGPIPE_DEFINE_ERROR(DegenerateSignal);
EEGPIPE_DEFINE_ERROR(NoPeak);

// geometry
EEGPIPE_DEFINE_ERROR(OffSphere);
EEGPIPE_DEFINE_ERROR(KTooLarge);
EEGPIPE_DEFINE_ERROR(UnknownLabel);
EEGPIPE_DEFINE_ERROR(DuplicateLabel);

// nn
EEGPIPE_DEFINE_ERROR(DimensionMismatch);
EEGPIPE_DEFINE_ERROR(EmptySequence);
EEGPIPE_DEFINE_ERROR(InsufficientData);
EEGPIPE_DEFINE_ERROR(EmptyDataset);

// io / config
EEGPIPE_DEFINE_ERROR(ParseError);
EEGPIPE_DEFINE_ERROR(InvalidConfig);

#undef EEGPIPE_DEFINE_ERROR

}  // namespace eegpipe
