"""Core numerics: wave map, profiles, characteristics, fan and datum."""
