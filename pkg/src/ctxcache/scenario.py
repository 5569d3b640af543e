"""Bundled desk-scale scenario: a city-circle query mix over eight entities.

Eight consumers query weather, two car parks, two vehicles, a bike rider, an
intersection, and a ring route through 25 simulated providers. Several
templates reuse the same weather and traffic attributes, so caching one
query's inputs pays off for the others.
"""

from __future__ import annotations

from .model import (
    ConsumerSla,
    ContextAttribute,
    ContextCatalog,
    ContextEntity,
    ContextProvider,
    INF,
    validate_catalog,
)
from .workload import SubQueryTemplate, WorkloadSpec, validate_workload

_ENTITIES = {
    "weather": ["temperature", "rain_prob", "wind_speed", "humidity"],
    "carpark_north": ["cp_n_slots", "cp_n_price", "cp_n_queue", "temperature"],
    "carpark_south": ["cp_s_slots", "cp_s_price", "cp_s_queue", "rain_prob"],
    "car_alpha": ["car_a_location", "car_a_speed", "car_a_heading"],
    "car_beta": ["car_b_location", "car_b_speed"],
    "bike_rider": ["bike_location", "bike_speed"],
    "intersection_main": ["signal_phase", "congestion", "pedestrian_flow"],
    "route_ring": ["travel_time", "incident_flag"],
}

# attr -> (owning entity, providers in preference order, lifetime seconds)
_ATTRIBUTES = {
    "temperature": ("weather", ["city_weather_api", "airport_station", "community_weather"], 60.0),
    "rain_prob": ("weather", ["city_weather_api", "weather_radar"], 60.0),
    "wind_speed": ("weather", ["airport_station", "suburb_station"], 45.0),
    "humidity": ("weather", ["city_weather_api", "community_weather"], 60.0),
    "cp_n_slots": ("carpark_north", ["cp_north_gate", "cp_city_aggregator"], 20.0),
    "cp_n_price": ("carpark_north", ["cp_north_billing"], INF),
    "cp_n_queue": ("carpark_north", ["cp_north_camera"], 15.0),
    "cp_s_slots": ("carpark_south", ["cp_south_gate", "cp_city_aggregator"], 20.0),
    "cp_s_price": ("carpark_south", ["cp_south_billing"], INF),
    "cp_s_queue": ("carpark_south", ["cp_south_camera"], 15.0),
    "car_a_location": ("car_alpha", ["car_a_gps", "telco_cell_a"], 5.0),
    "car_a_speed": ("car_alpha", ["car_a_gps", "fleet_telemetry"], 5.0),
    "car_a_heading": ("car_alpha", ["car_a_gps"], 8.0),
    "car_b_location": ("car_beta", ["car_b_gps", "telco_cell_b"], 5.0),
    "car_b_speed": ("car_beta", ["car_b_gps", "fleet_telemetry"], 5.0),
    "bike_location": ("bike_rider", ["bike_tracker"], 6.0),
    "bike_speed": ("bike_rider", ["bike_tracker"], 6.0),
    "signal_phase": ("intersection_main", ["signal_controller", "junction_radar"], 10.0),
    "congestion": ("intersection_main", ["traffic_cam_main", "road_loop_sensors", "junction_radar"], 30.0),
    "pedestrian_flow": ("intersection_main", ["traffic_cam_main", "council_sensors"], 20.0),
    "travel_time": ("route_ring", ["nav_service"], 40.0),
    "incident_flag": ("route_ring", ["nav_service", "incident_feed"], 90.0),
}

# provider -> (latency mean s, latency var s^2, sampling rate Hz, cost per retrieval)
_PROVIDERS = {
    "city_weather_api": (0.95, 0.012, 0.20, 0.12),
    "airport_station": (1.30, 0.020, 0.10, 0.10),
    "suburb_station": (1.10, 0.015, 0.10, 0.08),
    "weather_radar": (1.20, 0.018, 0.20, 0.15),
    "community_weather": (1.35, 0.025, 0.10, 0.05),
    "cp_north_gate": (0.45, 0.006, 0.50, 0.10),
    "cp_north_billing": (0.80, 0.010, 0.10, 0.06),
    "cp_north_camera": (0.60, 0.008, 0.50, 0.14),
    "cp_south_gate": (0.50, 0.006, 0.50, 0.10),
    "cp_south_billing": (0.85, 0.010, 0.10, 0.06),
    "cp_south_camera": (0.65, 0.008, 0.50, 0.14),
    "cp_city_aggregator": (1.30, 0.020, 0.20, 0.20),
    "car_a_gps": (0.997, 0.012, 1.00, 0.10),
    "telco_cell_a": (1.40, 0.030, 0.50, 0.25),
    "car_b_gps": (1.00, 0.012, 1.00, 0.10),
    "telco_cell_b": (1.45, 0.030, 0.50, 0.25),
    "fleet_telemetry": (1.20, 0.020, 0.50, 0.18),
    "bike_tracker": (0.70, 0.010, 1.00, 0.08),
    "signal_controller": (0.35, 0.004, 2.00, 0.05),
    "junction_radar": (1.05, 0.015, 1.00, 0.16),
    "traffic_cam_main": (0.90, 0.012, 0.50, 0.15),
    "road_loop_sensors": (1.00, 0.014, 1.00, 0.12),
    "council_sensors": (1.20, 0.018, 0.20, 0.09),
    "nav_service": (1.10, 0.016, 0.25, 0.22),
    "incident_feed": (1.50, 0.030, 0.10, 0.07),
}

# sla -> (price per response, freshness threshold, delay penalty, invalid penalty, rt_max s)
_SLAS = {
    "sla_premium_nav": (2.5, 0.60, 2.0, 1.5, 0.8),
    "sla_standard_nav": (1.8, 0.50, 1.5, 1.2, 1.0),
    "sla_parking_app": (2.0, 0.50, 1.8, 1.2, 0.7),
    "sla_weather_widget": (1.2, 0.30, 1.0, 0.8, 1.2),
    "sla_fitness_app": (1.5, 0.40, 1.2, 1.0, 1.0),
    "sla_safety_critical": (3.0, 0.70, 2.5, 2.0, 0.5),
    "sla_fleet_ops": (1.6, 0.50, 1.4, 1.0, 0.9),
    "sla_city_dashboard": (1.0, 0.20, 0.9, 0.7, 1.5),
}

# (template id, entities, attributes, sla, weight)
_TEMPLATES = [
    ("find_parking_basic", ["carpark_north", "carpark_south"],
     ["cp_n_slots", "cp_s_slots"], "sla_parking_app", 1.6),
    ("find_parking_cheap", ["carpark_north", "carpark_south"],
     ["cp_n_slots", "cp_s_slots", "cp_n_price", "cp_s_price"], "sla_parking_app", 1.2),
    ("parking_walkability", ["carpark_north", "carpark_south", "weather"],
     ["cp_n_slots", "cp_s_slots", "temperature", "rain_prob"], "sla_premium_nav", 1.4),
    ("jogging_check", ["weather"],
     ["temperature", "rain_prob", "wind_speed"], "sla_fitness_app", 1.5),
    ("cycling_comfort", ["weather", "bike_rider"],
     ["temperature", "wind_speed", "bike_location"], "sla_fitness_app", 0.7),
    ("crash_risk_alert", ["car_alpha", "intersection_main"],
     ["car_a_location", "car_a_speed", "signal_phase", "pedestrian_flow"], "sla_safety_critical", 1.0),
    ("junction_turn_advice", ["route_ring", "intersection_main"],
     ["travel_time", "congestion", "incident_flag"], "sla_standard_nav", 1.1),
    ("route_delay_check", ["route_ring"],
     ["travel_time", "incident_flag"], "sla_standard_nav", 0.9),
    ("city_overview", ["weather", "intersection_main", "route_ring"],
     ["temperature", "congestion", "travel_time", "pedestrian_flow"], "sla_city_dashboard", 0.5),
    ("fleet_track_a", ["car_alpha"],
     ["car_a_location", "car_a_speed", "car_a_heading"], "sla_fleet_ops", 0.8),
    ("fleet_track_b", ["car_beta"],
     ["car_b_location", "car_b_speed"], "sla_fleet_ops", 0.4),
    ("bike_nearby_parking", ["bike_rider", "carpark_north"],
     ["bike_location", "cp_n_slots"], "sla_parking_app", 0.6),
    ("intersection_monitor", ["intersection_main"],
     ["signal_phase", "congestion", "pedestrian_flow"], "sla_city_dashboard", 0.45),
    ("humidity_report", ["weather"],
     ["humidity", "temperature"], "sla_weather_widget", 0.35),
]


def bundled_catalog() -> ContextCatalog:
    catalog = ContextCatalog()
    for eid, attrs in _ENTITIES.items():
        catalog.entities[eid] = ContextEntity(eid, frozenset(attrs))
    for aid, (eid, providers, lifetime) in _ATTRIBUTES.items():
        catalog.attributes[aid] = ContextAttribute(aid, eid, tuple(providers), lifetime)
    for pid, (mean, var, rate, cost) in _PROVIDERS.items():
        catalog.providers[pid] = ContextProvider(pid, mean, var, rate, cost)
    for sid, (price, fresh, pen, inval, rt) in _SLAS.items():
        catalog.slas[sid] = ConsumerSla(sid, price, fresh, pen, inval, rt)
    return validate_catalog(catalog)


def bundled_workload(lambda_rate: float = 2.5, duration: float = 600.0, seed: int = 11) -> WorkloadSpec:
    templates = [
        SubQueryTemplate(tid, tuple(ents), tuple(attrs), sla, weight)
        for tid, ents, attrs, sla, weight in _TEMPLATES
    ]
    return WorkloadSpec(lambda_rate=lambda_rate, duration=duration, templates=templates, seed=seed)


def bundled_scenario(
    lambda_rate: float = 2.5, duration: float = 600.0, seed: int = 11
) -> tuple[ContextCatalog, WorkloadSpec]:
    catalog = bundled_catalog()
    workload = validate_workload(bundled_workload(lambda_rate, duration, seed), catalog)
    return catalog, workload
