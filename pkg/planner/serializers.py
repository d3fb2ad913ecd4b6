from django.conf import settings
from rest_framework import serializers


class PeriodSerializer(serializers.Serializer):
    start = serializers.IntegerField(min_value=1)
    end = serializers.IntegerField(min_value=1)

    def validate(self, attrs):
        if attrs['end'] < attrs['start']:
            raise serializers.ValidationError('period ends before it starts')
        return attrs


class QuerySerializer(serializers.Serializer):
    q = serializers.CharField()
    p = serializers.IntegerField(min_value=1)
    s = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=0)
    m = serializers.IntegerField(min_value=1, required=False, allow_null=True)


class SearchStatsSerializer(serializers.Serializer):
    nodes_expanded = serializers.IntegerField(min_value=0)
    prunes = serializers.DictField(child=serializers.IntegerField(min_value=0))
    elapsed_ms = serializers.FloatField(min_value=0)


class SolutionDocumentSerializer(serializers.Serializer):
    STATUS_CHOICES = ['success', 'failure']
    PROBLEM_CHOICES = ['sgq', 'stgq']

    schema = serializers.CharField()
    problem = serializers.ChoiceField(choices=PROBLEM_CHOICES)
    algorithm = serializers.CharField()
    status = serializers.ChoiceField(choices=STATUS_CHOICES)
    query = QuerySerializer()
    members = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    total = serializers.FloatField(allow_null=True)
    period = PeriodSerializer(allow_null=True, required=False)
    stats = SearchStatsSerializer()

    def validate_schema(self, value):
        expected = getattr(settings, 'PLANNER_SOLUTION_SCHEMA', 'planner.solution/1')
        if value != expected:
            raise serializers.ValidationError(f'unsupported schema {value!r}, expected {expected!r}')
        return value

    def validate(self, attrs):
        if attrs['status'] == 'failure':
            if attrs['total'] is not None or attrs['members']:
                raise serializers.ValidationError('a failure document carries no group')
        else:
            if attrs['total'] is None or not attrs['members']:
                raise serializers.ValidationError('a success document needs members and a total')
            if attrs['members'] != sorted(attrs['members']):
                raise serializers.ValidationError('members must be sorted')
        if attrs['problem'] == 'stgq' and attrs['status'] == 'success' and not attrs.get('period'):
            raise serializers.ValidationError('an STGQ solution needs a period')
        return attrs
