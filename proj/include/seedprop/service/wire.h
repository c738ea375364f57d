// Copyright 2026 The seedprop Authors
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

// Newline-delimited JSON protocol spoken with external backends. The
// backend writes a handshake line first; every later line is a request
// (engine -> backend) or its response. Each message has a "type" field.

#include <iosfwd>
#include <string>

#include "seedprop/detector/detector.h"
#include "seedprop/propagation/tracker_backend.h"
#include "seedprop/segfit/segmenter_backend.h"
#include "seedprop/store/serialization.h"

namespace seedprop::wire {

Json encode_handshake(const BackendInfo& info);
BackendInfo decode_handshake(const Json& j);

Json encode(const TrackRequest& r);
Json encode(const TrackResponse& r);
Json encode(const SegmentRequest& r);
Json encode(const SegmentResponse& r);
Json encode(const TrainRequest& r);
Json encode(const TrainResponse& r);
Json encode(const InferRequest& r);
Json encode(const InferResponse& r);

TrackRequest decode_track_request(const Json& j);
TrackResponse decode_track_response(const Json& j);
SegmentRequest decode_segment_request(const Json& j);
SegmentResponse decode_segment_response(const Json& j);
TrainRequest decode_train_request(const Json& j);
TrainResponse decode_train_response(const Json& j);
InferRequest decode_infer_request(const Json& j);
InferResponse decode_infer_response(const Json& j);

Json encode_error(const std::string& job_id, const std::string& message);

// Answers one request line; errors come back as error messages.
std::string handle_line(const std::string& line, TrackerBackend* tracker,
                        SegmenterBackend* segmenter, DetectorBackend* detector);

// Writes the handshake, then answers requests until `in` hits EOF. Any of
// the backends may be null; requests for a missing role get an error.
void serve(std::istream& in, std::ostream& out, const BackendInfo& info,
           TrackerBackend* tracker, SegmenterBackend* segmenter, DetectorBackend* detector);

}  // namespace seedprop::wire
