#!/usr/bin/env python3
# Copyright (c) blt contributors.
# SPDX-License-Identifier: Apache-2.0
"""Generate schemas/run_config.schema.json from `blt --describe-config`.

usage: gen_config_schema.py BLT_BINARY [OUTPUT]
"""
import json
import subprocess
import sys

TYPES = {
    "integer": {"type": "integer"},
    "number": {"type": "number"},
    "boolean": {"type": "boolean"},
    "string": {"type": "string"},
    "array of integers": {"type": "array", "items": {"type": "integer"}},
    "array of numbers": {"type": "array", "items": {"type": "number"}},
    "array of strings": {"type": "array", "items": {"type": "string"}},
}


def key_schema(key):
    schema = dict(TYPES[key["type"]])
    if key["positive"]:
        if schema["type"] == "array":
            schema["items"] = dict(schema["items"], exclusiveMinimum=0)
        else:
            schema["exclusiveMinimum"] = 0
    if key["name"] == "seed":
        schema["minimum"] = 0
    if key["default"] is not None:
        schema["default"] = key["default"]
    schema["description"] = key["help"]
    return schema


def build(description):
    variants = []
    for name, info in sorted(description["subcommands"].items()):
        props = {"subcommand": {"const": name}}
        required = ["subcommand"]
        for key in description["common"] + info["keys"]:
            if key["name"] == "subcommand":
                continue
            props[key["name"]] = key_schema(key)
            if key["required"]:
                required.append(key["name"])
        variants.append({
            "title": name,
            "type": "object",
            "properties": props,
            "required": required,
            "additionalProperties": False,
        })
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "https://blt.invalid/schemas/run_config.schema.json",
        "title": "blt run configuration",
        "oneOf": variants,
    }


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out = subprocess.run([sys.argv[1], "--describe-config"], check=True, capture_output=True, text=True).stdout
    text = json.dumps(build(json.loads(out)), indent=2, sort_keys=True) + "\n"
    if len(sys.argv) > 2:
        with open(sys.argv[2], "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
