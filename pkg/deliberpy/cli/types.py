"""Custom Click parameter types for DeliberPy."""

from typing import List

import click


class OverrideType(click.ParamType):
    """A ``section.key=value`` config override."""

    name = "key=value"

    def convert(self, value, param, ctx):
        if "=" not in value or not value.split("=", 1)[0].strip():
            self.fail(f"'{value}' is not of the form section.key=value", param, ctx)
        return value


class SeedListType(click.ParamType):
    """Comma-separated seeds with optional ranges: ``1,2,5-7``."""

    name = "seeds"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        seeds: List[int] = []
        try:
            for part in str(value).split(","):
                part = part.strip()
                if not part:
                    continue
                if "-" in part:
                    low, high = (int(x) for x in part.split("-", 1))
                    if low > high:
                        self.fail(f"Empty seed range '{part}'", param, ctx)
                    seeds.extend(range(low, high + 1))
                else:
                    seeds.append(int(part))
        except ValueError:
            self.fail(f"'{value}' is not a list of integer seeds", param, ctx)
        if not seeds:
            self.fail("At least one seed is required", param, ctx)
        return seeds


OVERRIDE = OverrideType()
SEED_LIST = SeedListType()
