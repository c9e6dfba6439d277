from rest_framework import serializers

import constants
from core.conf import SRConfig, get_setting
from simharness.scenarios import ScenarioConfig, grid_values

METRICS_COLUMNS = [
    'method', 'scenario', 'p', 'n', 'delta', 'lambda', 'k',
    'mse_beta', 'mse_alpha', 'bias2_beta', 'bias2_alpha',
]

EQUIVARIANCE_COLUMNS = ['method', 'transform', 'lambda', 'mmse']

LARGE_P = 10


# Serializers

# -- Input validation --
class SRConfigSerializer(serializers.Serializer):
    delta1 = serializers.FloatField(required=False, allow_null=True, default=None)
    delta2 = serializers.FloatField(required=False, allow_null=True, default=None)

    def _validate_level(self, value, name):
        if value is not None and not 0.0 < value < 0.5:
            raise serializers.ValidationError(f"{name} must lie in (0, 0.5).")
        return value

    def validate_delta1(self, value):
        return self._validate_level(value, 'delta1')

    def validate_delta2(self, value):
        return self._validate_level(value, 'delta2')

    def to_config(self):
        return SRConfig.from_settings(**self.validated_data)


class ScenarioConfigSerializer(serializers.Serializer):
    scenario = serializers.ChoiceField(choices=constants.SCENARIOS)
    p = serializers.IntegerField(min_value=1)
    n = serializers.IntegerField(min_value=3)
    m = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    delta = serializers.FloatField(min_value=0.0, default=0.0)
    lambda_grid = serializers.ListField(child=serializers.FloatField(), required=False, allow_null=True, default=None)
    k_grid = serializers.ListField(child=serializers.FloatField(), required=False, allow_null=True, default=None)
    grid = serializers.ChoiceField(choices=constants.GRIDS, default=constants.HALF_GRID)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=0)
    mode = serializers.ChoiceField(choices=constants.CONTAMINATION_MODES, default=constants.BERNOULLI)

    def validate_delta(self, value):
        if value >= 0.5:
            raise serializers.ValidationError("delta must be below 0.5, the breakdown point cannot exceed 50%.")
        return value

    def validate(self, attrs):
        if attrs['n'] < attrs['p'] + 2:
            raise serializers.ValidationError({'n': f"n must be at least p + 2 = {attrs['p'] + 2}."})

        if attrs.get('m') is None:
            key = 'REPLICATIONS_LARGE_P' if attrs['p'] > LARGE_P else 'REPLICATIONS_SMALL_P'
            attrs['m'] = int(get_setting(key))

        if attrs['scenario'] == constants.NEO:
            default_grid = list(grid_values(attrs['grid']))
            for name in ('lambda_grid', 'k_grid'):
                values = attrs.get(name)
                if values is None:
                    attrs[name] = default_grid
                elif not values:
                    raise serializers.ValidationError({name: "grid must not be empty."})
                elif any(value < 0 for value in values):
                    raise serializers.ValidationError({name: "grid values must be non-negative."})
        else:
            attrs['lambda_grid'] = []
            attrs['k_grid'] = []
        return attrs

    def to_config(self):
        data = self.validated_data
        return ScenarioConfig(
            scenario=data['scenario'], p=data['p'], n=data['n'], M=data['m'], delta=data['delta'],
            lambda_grid=tuple(data['lambda_grid']), k_grid=tuple(data['k_grid']),
            seed=data['seed'], mode=data['mode'],
        )


# -- Reports --
class FitReportSerializer(serializers.Serializer):
    method = serializers.CharField()
    dataset = serializers.CharField()
    n = serializers.IntegerField()
    p = serializers.IntegerField()
    coefficients = serializers.DictField(child=serializers.FloatField())
    sigma2 = serializers.FloatField()
    r2 = serializers.FloatField()
    adj_r2 = serializers.FloatField()
    outlier_indices = serializers.ListField(child=serializers.IntegerField())
    weights = serializers.DictField(child=serializers.ListField(child=serializers.IntegerField()))
    classification = serializers.ListField(child=serializers.CharField())
    diagnostics = serializers.DictField()
    provenance = serializers.DictField()

    def validate_outlier_indices(self, value):
        if value != sorted(value) or any(index < 1 for index in value):
            raise serializers.ValidationError("Outlier indices must be 1-based and sorted ascending.")
        return value


class MetricsCellSerializer(serializers.Serializer):
    method = serializers.CharField()
    scenario = serializers.CharField()
    p = serializers.IntegerField()
    n = serializers.IntegerField()
    delta = serializers.FloatField()
    lam = serializers.FloatField()
    k = serializers.FloatField()
    mse_beta = serializers.FloatField()
    mse_alpha = serializers.FloatField()
    bias2_beta = serializers.FloatField()
    bias2_alpha = serializers.FloatField()

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data['lambda'] = data.pop('lam')
        return {column: data[column] for column in METRICS_COLUMNS}


class EquivarianceRowSerializer(serializers.Serializer):
    method = serializers.CharField()
    transform = serializers.CharField()
    lam = serializers.FloatField()
    mmse = serializers.FloatField()

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data['lambda'] = data.pop('lam')
        return {column: data[column] for column in EQUIVARIANCE_COLUMNS}
