"""Regenerates crates/core/data/corpus.csv: synthetic point labels with the
class each is expected to match (empty = expected to stay unmatched)."""
import csv, pathlib, random

rng = random.Random(20230401)

ENGLISH = [
    ("Zone_Air_Temp", "Zone_Air_Temperature_Sensor", "°C"),
    ("Supply_Air_Temp", "Supply_Air_Temperature_Sensor", "°C"),
    ("Return_Air_Temp", "Return_Air_Temperature_Sensor", "°C"),
    ("OA_Temp", "Outside_Air_Temperature_Sensor", "°C"),
    ("Avg_Zone_Temp", "Average_Zone_Air_Temperature_Sensor", "°C"),
    ("Mixed_Air_Temp", "Mixed_Air_Temperature_Sensor", "°C"),
    ("Discharge_Air_Temp", "Discharge_Air_Temperature_Sensor", "°C"),
    ("Zone_Air_Temp_SP", "Zone_Air_Temperature_Setpoint", "°C"),
    ("SA_Temp_SP", "Supply_Air_Temperature_Setpoint", "°C"),
    ("Cooling_Temp_SP", "Cooling_Temperature_Setpoint", "°C"),
    ("Heating_Temp_SP", "Heating_Temperature_Setpoint", "°C"),
    ("Zone_Humidity", "Zone_Air_Humidity_Sensor", "%"),
    ("RH", "Relative_Humidity_Sensor", "%"),
    ("CO2", "CO2_Sensor", "ppm"),
    ("CO2_SP", "CO2_Setpoint", "ppm"),
    ("Illuminance", "Illuminance_Sensor", "lx"),
    ("Lux", "Illuminance_Sensor", "lx"),
    ("People_Number", "Occupancy_Count_Sensor", ""),
    ("Occupancy", "Occupancy_Sensor", ""),
    ("Damper_Position", "Damper_Position_Sensor", "%"),
    ("Valve_Pos", "Valve_Position_Sensor", "%"),
    ("Static_Press", "Static_Pressure_Sensor", "Pa"),
    ("SA_Static_Press_SP", "Supply_Air_Static_Pressure_Setpoint", "Pa"),
    ("SA_Flow", "Supply_Air_Flow_Sensor", "m3/h"),
    ("Air_Flow_SP", "Air_Flow_Setpoint", "m3/h"),
    ("Electric_Power", "Electric_Power_Sensor", "kW"),
    ("Energy", "Energy_Sensor", "kWh"),
    ("Current", "Current_Sensor", "A"),
    ("Voltage", "Voltage_Sensor", "V"),
    ("Battery", "Battery_Voltage_Sensor", "V"),
    ("Freq", "Frequency_Sensor", "Hz"),
    ("Fan_Speed_Cmd", "Fan_Speed_Command", ""),
    ("Run_Status", "Run_Status", ""),
    ("Fault", "Fault_Status", ""),
    ("Filter_Alarm", "Change_Filter_Alarm", ""),
    ("On_Off", "On_Off_Status", ""),
    ("On_Off_Cmd", "On_Off_Command", ""),
    ("Mode_Status", "Mode_Status", ""),
    ("High_Temp_Alarm", "High_Temperature_Alarm", ""),
    ("CHW_Supply_Temp", "Chilled_Water_Supply_Temperature_Sensor", "°C"),
    ("HW_Return_Temp", "Hot_Water_Return_Temperature_Sensor", "°C"),
    ("CHW_Flow", "Chilled_Water_Flow_Sensor", "L/min"),
    ("Filter_DP", "Filter_Differential_Pressure_Sensor", "Pa"),
    ("Enable_Cmd", "Enable_Command", ""),
]

JAPANESE = [
    ("給気温度", "Supply_Air_Temperature_Sensor", "°C"),
    ("還気温度", "Return_Air_Temperature_Sensor", "°C"),
    ("給気温度設定値", "Supply_Air_Temperature_Setpoint", "°C"),
    ("照度", "Illuminance_Sensor", "lx"),
    ("人数", "Occupancy_Count_Sensor", ""),
    ("発停", "On_Off_Status", ""),
    ("二酸化炭素", "CO2_Sensor", "ppm"),
    ("電力", "Electric_Power_Sensor", "kW"),
    ("ダンパ開度", "Damper_Position_Sensor", "%"),
    ("外気湿度", "Outside_Air_Humidity_Sensor", "%"),
]

ROOMS = [("Conference_Room", "Conference_Room"), ("Library", "Library"), ("Lobby", "Lobby")]

rows = []


def add(name, expected, unit):
    code = f"80.{len(rows) // 100:02d}.{len(rows) % 100:03d}.001"
    rows.append((code, name, unit, expected))


for i in range(60):
    desc, cls, unit = ENGLISH[i % len(ENGLISH)]
    f = i % 6 + 1
    add(f"{f}F_{f}{rng.randint(1, 30):02d}_{desc}", cls, unit)
for i in range(50):
    desc, cls, unit = ENGLISH[(i * 7) % len(ENGLISH)]
    add(f"SDF_{rng.randint(100, 999)}_{desc}", cls, unit)
for i in range(30):
    desc, cls, unit = ENGLISH[(i * 5 + 3) % len(ENGLISH)]
    term = ["AC", "VAV", "CAV"][i % 3]
    add(f"{term}_{rng.randint(1, 999)}_{desc}", cls, unit)
for i in range(30):
    desc, cls, unit = ENGLISH[(i * 11 + 1) % len(ENGLISH)]
    f = i % 6 + 1
    add(f"{f}F_VAV_{rng.randint(100, 999)}_System__AC_{rng.randint(100, 999)}_{desc}", cls, unit)
for i in range(30):
    desc, cls, unit = JAPANESE[i % len(JAPANESE)]
    add(f"VAV-{rng.randint(1, 60)} {desc}", cls, unit)
for i in range(20):
    desc, cls, unit = ENGLISH[(i * 3 + 2) % len(ENGLISH)]
    add(f"SDF{rng.randint(1, 99)}_{desc}", cls, unit)
for i in range(6):
    desc, cls = ROOMS[i % len(ROOMS)]
    f = i % 6 + 1
    add(f"{f}F_{f}{rng.randint(31, 60):02d}_{desc}", cls, "")
for i in range(10):
    add(f"Reserve_{rng.choice(['AV', 'DI', 'DO', 'AI'])}_{i + 1}", "", "")
for i in range(4):
    add(f"AC_{rng.randint(1, 999)}_Spare_Contact", "", "")

out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/corpus.csv"
with out.open("w", newline="", encoding="utf-8") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["code", "name", "unit", "expected"])
    w.writerows(rows)
print(f"{len(rows)} rows -> {out}")
