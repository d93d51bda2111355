import math

# Receiver optics. The reference setup leaves these to the VLC literature.
OPTICS = {
    "detector_area": 1e-4,  # m^2
    "filter_gain": 1.0,
    "refractive_index": 1.5,
    "fov": math.radians(60.0),
}

LED = {
    "semiangle_half_power": math.radians(60.0),
}

ROOM = {
    "dimensions": (10.0, 10.0, 3.0),
    "led_position": (5.0, 5.0, 3.0),
    "led_normal": (0.0, 0.0, -1.0),
    "receiver_plane_z": 0.0,
    "receiver_normal": (0.0, 0.0, 1.0),
    "num_users": 20,
}

SIGNAL = {
    "noise_power_dbm": -104.0,
    "p_max_mw": 16.0,
    "dc_bias": 20.0,
    "peak_intensity": 30.0,
    # PAM coefficient is never given numerically; the generator warns when it falls back.
    "pam_coefficient": 1.0,
}

SWEEP = {
    "p_max_values": (8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0),
}

# Resampling budget per user before giving up on a room geometry.
MAX_RESAMPLES = 1000
