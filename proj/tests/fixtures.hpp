#pragma once

// Canonical config documents shared by the unit and acceptance suites.
// The cluster file defines one manager plus three workers (one password
// login, two key logins); the experiment file co-locates a database and a
// streaming-analytics workload on two of those workers, repeated twice.

namespace fixtures {

inline const char* kClusterConfig = R"(cluster:
  manager:
      ip: "0.0.0.0" # manager's IP
      hostname: "manager"
      ssh_key_path: "/conf/ssh_keys/ssh_key.pem"
  nodes: # system under test
    - ip: "10.10.10.10" # using password
      hostname: "raspberrypi"
      username: "pi"
      password: "raspberrypi"
    - ip: "10.10.10.11"
      hostname: "rpi"
      username: "pi"
      password: "raspberry"
    - ip: "10.10.10.12" # using an SSH key
      hostname: "small_server"
      username: "bench"
      ssh_key_path: "/conf/ssh_keys/ssh_key.pem"
)";

inline const char* kExperimentSuite = R"( experiments:
   - experiment:
       record_name: "streaming_with_db"
       repetition: 2
       duration: "20m"
       workloads:
         - name: "database"
           cluster: [ "rpi", "small_server" ]
           parameters:
             db: "mongodb"
         - name: "marketing-campaign"
           cluster: [ "rpi", "small_server" ]
           parameters:
             engine: "storm"
             enging_parameters:
                 tuples_per_second: 1000
                 capacity_per_window: 10
           shift: 5m
 idle_between_experiments: "2m"
 orchestrator: "docker swarm"
)";

} // namespace fixtures
