#!/usr/bin/env python3
"""Regenerates crates/core/data/taxonomy.json from the indented outline below."""
import json, pathlib

OUTLINE = """
Point
  Sensor
    Temperature_Sensor
      Air_Temperature_Sensor
        Zone_Air_Temperature_Sensor
          Average_Zone_Air_Temperature_Sensor
        Supply_Air_Temperature_Sensor
        Return_Air_Temperature_Sensor
        Outside_Air_Temperature_Sensor
        Discharge_Air_Temperature_Sensor
        Mixed_Air_Temperature_Sensor
        Exhaust_Air_Temperature_Sensor
      Water_Temperature_Sensor
        Chilled_Water_Temperature_Sensor
          Chilled_Water_Supply_Temperature_Sensor
          Chilled_Water_Return_Temperature_Sensor
        Hot_Water_Temperature_Sensor
          Hot_Water_Supply_Temperature_Sensor
          Hot_Water_Return_Temperature_Sensor
    Humidity_Sensor
      Relative_Humidity_Sensor
      Zone_Air_Humidity_Sensor
      Outside_Air_Humidity_Sensor
      Supply_Air_Humidity_Sensor
      Return_Air_Humidity_Sensor
    Pressure_Sensor
      Static_Pressure_Sensor
        Supply_Air_Static_Pressure_Sensor
        Building_Air_Static_Pressure_Sensor
      Differential_Pressure_Sensor
        Chilled_Water_Differential_Pressure_Sensor
        Filter_Differential_Pressure_Sensor
    Flow_Sensor
      Air_Flow_Sensor
        Supply_Air_Flow_Sensor
        Return_Air_Flow_Sensor
        Outside_Air_Flow_Sensor
      Water_Flow_Sensor
        Chilled_Water_Flow_Sensor
        Hot_Water_Flow_Sensor
    Occupancy_Sensor
      Occupancy_Count_Sensor
    Illuminance_Sensor
    CO2_Sensor
      Return_Air_CO2_Sensor
    Power_Sensor
      Electric_Power_Sensor
    Energy_Sensor
    Current_Sensor
    Voltage_Sensor
      Battery_Voltage_Sensor
    Position_Sensor
      Damper_Position_Sensor
      Valve_Position_Sensor
    Frequency_Sensor
    Speed_Sensor
  Setpoint
    Temperature_Setpoint
      Zone_Air_Temperature_Setpoint
      Supply_Air_Temperature_Setpoint
      Cooling_Temperature_Setpoint
      Heating_Temperature_Setpoint
      Chilled_Water_Supply_Temperature_Setpoint
    Humidity_Setpoint
    Static_Pressure_Setpoint
      Supply_Air_Static_Pressure_Setpoint
    CO2_Setpoint
    Flow_Setpoint
      Air_Flow_Setpoint
    Damper_Position_Setpoint
  Status
    On_Status
      On_Off_Status
    Off_Status
    Fault_Status
    Mode_Status
    Occupancy_Status
    System_Status
    Run_Status
    Damper_Status
    Filter_Status
  Command
    On_Off_Command
    Damper_Position_Command
    Valve_Command
      Valve_Position_Command
    Fan_Speed_Command
    Mode_Command
    Enable_Command
  Alarm
    High_Temperature_Alarm
    Low_Temperature_Alarm
    Change_Filter_Alarm
    Communication_Loss_Alarm
    Smoke_Alarm
  Parameter
    Limit
      Max_Limit
      Min_Limit
    Delay_Parameter
    Deadband_Parameter
Equipment
  AHU
  Terminal_Unit
    VAV
    CAV
    Fan_Coil_Unit
  Damper
    SDF
    Outside_Damper
  Fan
    Supply_Fan
    Exhaust_Fan
  Pump
    Chilled_Water_Pump
    Hot_Water_Pump
  Chiller
  Boiler
  Cooling_Tower
  Thermostat
  Valve
  Meter
    Electrical_Meter
    Water_Meter
  Lighting_Equipment
    Luminaire
  Heat_Exchanger
  Filter
  Sensor_Equipment
  Camera
Location
  Building
  Floor
  Space
    Room
      Office
      Conference_Room
      Laboratory
      Storage_Room
      Restroom
      Mechanical_Room
      Server_Room
      Break_Room
    Common_Space
      Auditorium
      Library
      Lobby
      Cafeteria
      Lounge
    Corridor
    Entrance
  Zone
    HVAC_Zone
    Lighting_Zone
    Fire_Zone
  Outdoor_Area
  Parking_Structure
  Wing
"""

RELATIONS = [
    ("feeds", "isFedBy"),
    ("hasPoint", "isPointOf"),
    ("hasPart", "isPartOf"),
    ("hasLocation", "isLocationOf"),
    ("controls", "isControlledBy"),
    ("meters", "isMeteredBy"),
]

def main():
    classes, stack = [], []
    for line in OUTLINE.strip("\n").splitlines():
        depth = (len(line) - len(line.lstrip(" "))) // 2
        name = line.strip()
        stack = stack[:depth]
        parent = stack[-1] if stack else None
        root = stack[0] if stack else name
        classes.append({"name": name, "superclass": parent, "kind": root.lower()})
        stack.append(name)
    doc = {
        "namespace": "https://brickschema.org/schema/Brick#",
        "classes": classes,
        "relations": [{"name": a, "inverse": b} for a, b in RELATIONS],
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/taxonomy.json"
    out.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    print(f"{len(classes)} classes -> {out}")

if __name__ == "__main__":
    main()
