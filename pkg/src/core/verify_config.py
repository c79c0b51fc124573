"""
Configuration verification script.

Run this to check that a scenario file and the environment are correctly
configured before launching a long pipeline:

    python -m src.core.verify_config scenario.env
"""

import sys
from pathlib import Path
from typing import Optional, Union

from src.core.config import get_settings, load_scenario
from src.core.exceptions import ConfigError
from src.core.reporting import format_number


def verify_configuration(path: Optional[Union[str, Path]] = None) -> bool:
    """Load, validate and print the application settings and a scenario."""
    print("=" * 60)
    print("CONFIGURATION VERIFICATION")
    print("=" * 60)

    try:
        settings = get_settings()
        scenario = load_scenario(path)
    except ConfigError as e:
        print("\nCONFIGURATION ERROR\n")
        print(e)
        print("\nFix the scenario file or the WILD_* variables and try again.")
        return False

    print(f"\nScenario: {path or 'defaults'}\n")

    print("APPLICATION:")
    print(f"   Name: {settings.app_name}")
    print(f"   Version: {settings.app_version}")
    print(f"   Log Level: {settings.log_level}")
    print(f"   Log Directory: {settings.log_dir} (to file: {settings.log_to_file})")
    print(f"   Retention: {settings.log_retention_days} days")

    print("\nSCENARIO:")
    for name, value in scenario.model_dump().items():
        shown = format_number(value) if isinstance(value, float) else value
        print(f"   {name}: {shown}")
    print(f"   zeta2/T: {format_number(scenario.zeta2_over_T)}")
    print(f"   refined grid size: {scenario.refined_grid_size}")

    print("\n" + "=" * 60)
    print("All settings valid and ready to use!")
    print("=" * 60)
    return True


if __name__ == "__main__":
    sys.exit(0 if verify_configuration(sys.argv[1] if len(sys.argv) > 1 else None) else 3)
